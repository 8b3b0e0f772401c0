#pragma once

#include <functional>

#include "iat/nn.hpp"
#include "iat/rng.hpp"
#include "iat/tensor.hpp"

namespace iat {

/// l-inf attack hyperparameters. epsilon / step_size are in data units on
/// [lo, hi]-scaled inputs (pixel 8/255 on a 0..255 scale becomes 8.0/255).
struct AttackConfig {
  double epsilon = 0.0;
  double step_size = 0.0;
  int iterations = 1;
  bool random_start = false;
  double lo = 0.0;
  double hi = 1.0;

  void validate() const;
  /// iterations == 1 && step_size == epsilon && !random_start
  bool fgsm_equivalent() const;
};

/// Three-valued sign: sgn(0) == 0.
inline double sgn(double v) { return (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Componentwise clamp of (candidate - origin) to [-epsilon, epsilon],
/// then clamp to [lo, hi].
Tensor project_linf(const Tensor& candidate, const Tensor& origin, double epsilon,
                    double lo, double hi);

/// Gradient of a scalar loss w.r.t. the input batch, labels already bound.
using InputGradFn = std::function<Tensor(const Tensor&)>;

/// Single signed-gradient step of size epsilon, clamped to bounds.
Tensor fgsm_with(const InputGradFn& grad, const Tensor& x, const AttackConfig& cfg);

/// Iterated signed steps with projection back to the epsilon-ball.
/// The model behind `grad` is frozen for the duration of the attack.
Tensor pgd_with(const InputGradFn& grad, const Tensor& x, const AttackConfig& cfg,
                Rng* rng = nullptr);

/// Cross-entropy input gradient for a dense model with the true labels y.
InputGradFn ce_input_grad(const Model& m, const Tensor& y);

Tensor fgsm(const Model& m, const Tensor& x, const Tensor& y, const AttackConfig& cfg);
Tensor pgd(const Model& m, const Tensor& x, const Tensor& y, const AttackConfig& cfg,
           Rng* rng = nullptr);

}  // namespace iat
