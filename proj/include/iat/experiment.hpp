#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iat/config.hpp"
#include "iat/dataset.hpp"
#include "iat/train.hpp"

namespace iat {

/// Builds the dataset named by [run] dataset: "synthetic-digits", "blobs",
/// or "idx" (directory from [run] data_dir or the IAT_DATA_DIR variable).
Dataset dataset_from_config(const Config& cfg);

AttackConfig train_attack_from_config(const Config& cfg);
MixPolicy mix_policy_for(const Config& cfg, Method method);
TrainConfig train_config_from(const Config& cfg, Method method, std::uint64_t seed);

struct EvalAttackSpec {
  std::string kind;  // clean | fgsm | pgd
  AttackConfig config;
};

/// Parses an evaluation column token: "clean", "fgsm", or "pgd<N>".
EvalAttackSpec eval_attack_from_token(const Config& cfg, const std::string& token);

/// Runs the numerical theory checks standalone and returns the report as a
/// JSON document; any failed verdicts are appended to `diagnostics`.
std::string theory_report_json(const Config& cfg, std::vector<std::string>& diagnostics);

struct ExperimentOutcome {
  int exit_code = 1;
  std::string out_dir;
  std::vector<std::string> diagnostics;  // fired sanity checks, verbatim
  std::vector<std::string> files;        // artifacts written
};

/// Full recipe: trains every (method, seed) cell, runs the configured
/// evaluations / analyses / theory checks, writes CSV + JSON reports and a
/// manifest. Exit code 0 iff every stage completed and no diagnostic fired.
ExperimentOutcome run_experiment(const Config& cfg, const std::string& out_dir_override = "",
                                 std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace iat
