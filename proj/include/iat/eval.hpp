#pragma once

#include <string>
#include <vector>

#include "iat/attacks.hpp"
#include "iat/dataset.hpp"
#include "iat/nn.hpp"

namespace iat {

/// One evaluated cell: attack descriptor -> error rate in percent.
struct EvalCell {
  std::string attack_kind;  // "clean", "fgsm", "pgd"
  double epsilon = 0.0;
  double step_size = 0.0;
  int iterations = 0;
  double error_pct = 0.0;
  std::size_t n = 0;
};

struct EvalReport {
  std::string model_id;
  std::vector<EvalCell> rows;
};

/// Argmax error in percent; ties break toward the lowest class index.
double eval_clean(const Model& m, const Split& test);

/// Adversarial examples generated against this same model, then scored.
/// Evaluation attacks are deterministic by default; pass an rng only for
/// random-restart stress tests.
double eval_whitebox(const Model& m, const Split& test, const AttackConfig& attack,
                     Rng* rng = nullptr);

/// Adversarial examples crafted on `source`, scored on `target`.
double eval_transfer(const Model& target, const Model& source, const Split& test,
                     const AttackConfig& attack, Rng* rng = nullptr);

enum class SweepAxis { epsilon, iterations };

/// One white-box evaluation per axis value, base config otherwise shared.
/// Values must be sorted ascending. An epsilon of 0 reproduces clean error.
EvalReport sweep(const Model& m, const Split& test, SweepAxis axis,
                 const std::vector<double>& values, const AttackConfig& base,
                 const std::string& model_id);

/// Square grid of error rates; row = target model, column = attack source.
/// Diagonal cells are white-box.
struct TransferMatrix {
  std::vector<std::string> model_ids;
  std::vector<double> error_pct;  // row-major, targets x sources

  double at(std::size_t target, std::size_t source) const {
    return error_pct[target * model_ids.size() + source];
  }
};

TransferMatrix transfer_matrix(const std::vector<const Model*>& models,
                               const std::vector<std::string>& ids, const Split& test,
                               const AttackConfig& attack);

/// Black-box-vs-white-box sanity: every off-diagonal cell should sit at or
/// below its row's diagonal plus a sampling tolerance. Violations are
/// reported, never hidden.
std::vector<std::string> transfer_violations(const TransferMatrix& tm, double tolerance_pts);

}  // namespace iat
