#include "iat/attacks.hpp"

#include <algorithm>
#include <stdexcept>

namespace iat {

void AttackConfig::validate() const {
  if (epsilon < 0.0) throw std::invalid_argument("attack: epsilon must be >= 0");
  if (step_size <= 0.0) throw std::invalid_argument("attack: step_size must be > 0");
  if (iterations < 1) throw std::invalid_argument("attack: iterations must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("attack: lo must be < hi");
}

bool AttackConfig::fgsm_equivalent() const {
  return iterations == 1 && step_size == epsilon && !random_start;
}

Tensor project_linf(const Tensor& candidate, const Tensor& origin, double epsilon,
                    double lo, double hi) {
  if (candidate.shape != origin.shape)
    throw std::invalid_argument("project_linf: shape mismatch");
  Tensor out = candidate;
  for (std::size_t k = 0; k < out.data.size(); ++k) {
    const double delta = std::clamp(out.data[k] - origin.data[k], -epsilon, epsilon);
    out.data[k] = std::clamp(origin.data[k] + delta, lo, hi);
  }
  return out;
}

Tensor fgsm_with(const InputGradFn& grad, const Tensor& x, const AttackConfig& cfg) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be >= 0");
  Tensor g = grad(x);
  if (g.shape != x.shape) throw std::invalid_argument("fgsm: gradient shape mismatch");
  Tensor out = x;
  for (std::size_t k = 0; k < out.data.size(); ++k)
    out.data[k] = std::clamp(out.data[k] + cfg.epsilon * sgn(g.data[k]), cfg.lo, cfg.hi);
  out.require_finite("fgsm output");
  return out;
}

Tensor pgd_with(const InputGradFn& grad, const Tensor& x, const AttackConfig& cfg,
                Rng* rng) {
  cfg.validate();
  Tensor cur = x;
  if (cfg.random_start) {
    if (rng == nullptr) throw std::invalid_argument("pgd: random_start requires an rng");
    for (auto& v : cur.data) v += rng->uniform(-cfg.epsilon, cfg.epsilon);
    cur = project_linf(cur, x, cfg.epsilon, cfg.lo, cfg.hi);
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    Tensor g = grad(cur);
    if (g.shape != x.shape) throw std::invalid_argument("pgd: gradient shape mismatch");
    for (std::size_t k = 0; k < cur.data.size(); ++k)
      cur.data[k] += cfg.step_size * sgn(g.data[k]);
    cur = project_linf(cur, x, cfg.epsilon, cfg.lo, cfg.hi);
  }
  cur.require_finite("pgd output");
  return cur;
}

InputGradFn ce_input_grad(const Model& m, const Tensor& y) {
  validate_soft_labels(y);
  return [&m, y](const Tensor& x) {
    auto fwd = forward(m, x);
    auto loss = loss_ce(fwd.logits, y);
    return input_gradient(m, fwd.tape, loss.dlogits);
  };
}

Tensor fgsm(const Model& m, const Tensor& x, const Tensor& y, const AttackConfig& cfg) {
  return fgsm_with(ce_input_grad(m, y), x, cfg);
}

Tensor pgd(const Model& m, const Tensor& x, const Tensor& y, const AttackConfig& cfg,
           Rng* rng) {
  return pgd_with(ce_input_grad(m, y), x, cfg, rng);
}

}  // namespace iat
