#pragma once

#include <functional>
#include <string>
#include <vector>

#include "iat/attacks.hpp"
#include "iat/dataset.hpp"
#include "iat/mix.hpp"
#include "iat/nn.hpp"

namespace iat {

enum class Method { baseline, mixup, manifold_mixup, adv_train, iat_mixup, iat_manifold };

const char* to_string(Method m);
Method method_from_string(const std::string& s);
bool method_uses_attack(Method m);
bool method_uses_mix(Method m);

/// Piecewise-constant step schedule: initial rate multiplied by decay_factor
/// at each listed epoch.
struct LrSchedule {
  double initial = 0.1;
  double decay_factor = 0.1;
  std::vector<int> decay_epochs;  // strictly increasing
};

double lr_at(const LrSchedule& schedule, int epoch);

struct TrainConfig {
  Method method = Method::baseline;
  std::vector<std::size_t> hidden{128, 128, 128};
  int epochs = 40;
  std::size_t batch_size = 64;
  LrSchedule lr{0.1, 0.1, {20, 30}};
  double momentum = 0.9;
  AttackConfig attack;   // training attack (adv_train / iat_*)
  MixPolicy mix;         // interpolation policy (mixup / manifold / iat_*)
  std::uint64_t seed = 1;
  /// The adversarial baseline averages clean and adversarial losses; set
  /// false to train on the adversarial loss alone (ablation).
  bool adv_include_clean = true;
  /// Test hook, called with the exact (x, y) batch handed to the training
  /// attack. Leave empty outside of tests.
  std::function<void(const Tensor&, const Tensor&)> attack_observer;

  void validate(std::size_t class_count) const;
};

struct EpochRecord {
  int epoch = 0;
  double clean_loss = 0.0;
  double adv_loss = 0.0;
  double combined_loss = 0.0;
  double train_error_pct = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
};

struct StepLosses {
  double clean = 0.0;
  double adv = 0.0;
  double combined = 0.0;
};

/// One interpolated-adversarial-training update on a batch:
///  1. interpolated loss on the unperturbed batch (fresh draw);
///  2. adversarial examples from the raw batch with its original labels;
///  3. interpolated loss on the adversarial batch (second fresh draw);
///  4. one SGD step on the mean of the two losses.
StepLosses iat_update(Model& m, const Tensor& x, const Tensor& y, const TrainConfig& cfg,
                      SgdState& sgd, double lr, Rng& rng);

struct TrainResult {
  Model model;
  TrainHistory history;
};

/// Runs the configured method over shuffled mini-batches. Deterministic for
/// a given seed. Divergence (non-finite or loss > 1e6) stops the run and is
/// flagged in the history together with the epochs completed so far.
TrainResult train(const TrainConfig& cfg, const Dataset& data);

}  // namespace iat
