#include "iat/mix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iat {

const char* to_string(MixMode mode) {
  switch (mode) {
    case MixMode::none: return "none";
    case MixMode::input: return "input";
    case MixMode::manifold: return "manifold";
  }
  return "?";
}

MixMode mix_mode_from_string(const std::string& s) {
  if (s == "none") return MixMode::none;
  if (s == "input") return MixMode::input;
  if (s == "manifold") return MixMode::manifold;
  throw std::invalid_argument("unknown mix mode: " + s);
}

void MixPolicy::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("mix: alpha and beta must be > 0");
  if (mode == MixMode::manifold && eligible_layers.empty())
    throw std::invalid_argument("mix: manifold mode needs eligible layers");
}

double sample_lambda(double alpha, double beta, Rng& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("sample_lambda: shapes must be > 0");
  for (;;) {
    const double ga = rng.gamma(alpha);
    const double gb = rng.gamma(beta);
    if (ga + gb > 0.0) return ga / (ga + gb);
  }
}

MixDraw make_draw(const MixPolicy& policy, std::size_t batch_size, Rng& rng) {
  policy.validate();
  MixDraw draw;
  if (policy.mode == MixMode::none) {
    draw.lambda = 1.0;
    draw.permutation.resize(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) draw.permutation[i] = i;
    draw.layer_index = 0;
    return draw;
  }
  if (batch_size < 2) throw std::invalid_argument("make_draw: batch size must be >= 2");
  draw.lambda = sample_lambda(policy.alpha, policy.beta, rng);
  draw.permutation = rng.permutation(batch_size);
  if (policy.mode == MixMode::input) {
    draw.layer_index = 0;
  } else {
    draw.layer_index = policy.eligible_layers[rng.index(policy.eligible_layers.size())];
  }
  return draw;
}

MixedLoss mixed_loss(const Model& m, const Tensor& x, const Tensor& y, const MixDraw& draw) {
  Injection inj{draw.layer_index, draw.lambda, draw.permutation};
  auto fwd = forward(m, x, inj);
  const Tensor ymix = mix_labels(y, draw.permutation, draw.lambda);
  auto loss = loss_ce(fwd.logits, ymix);
  return MixedLoss{loss.loss, std::move(loss.dlogits), std::move(fwd.tape)};
}

double DtildeMixture::mean_lambda() const { return 1.0 - mean_one_minus_lambda(); }

double DtildeMixture::mean_one_minus_lambda() const {
  return 2.0 * alpha * beta / ((alpha + beta) * (alpha + beta + 1.0));
}

double DtildeMixture::mean_one_minus_lambda_sq() const {
  return alpha * beta / ((alpha + beta) * (alpha + beta + 1.0));
}

double DtildeMixture::sample(Rng& rng) const {
  const bool first = rng.uniform() < weight1;
  return first ? sample_lambda(a1, b1, rng) : sample_lambda(a2, b2, rng);
}

namespace {
double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) - log_beta_fn(a, b));
}
}  // namespace

double DtildeMixture::pdf(double lambda) const {
  return weight1 * beta_pdf(lambda, a1, b1) + weight2 * beta_pdf(lambda, a2, b2);
}

DtildeMixture dtilde_params(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("dtilde_params: shapes must be > 0");
  DtildeMixture d;
  d.alpha = alpha;
  d.beta = beta;
  d.weight1 = alpha / (alpha + beta);
  d.weight2 = beta / (alpha + beta);
  d.a1 = alpha + 1.0;
  d.b1 = beta;
  d.a2 = beta + 1.0;
  d.b2 = alpha;
  return d;
}

}  // namespace iat
