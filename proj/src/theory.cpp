#include "iat/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace iat::theory {

namespace {

double dot(const std::vector<double>& w, const double* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

double norm2(const double* x, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) acc += x[i] * x[i];
  return std::sqrt(acc);
}

double cosine(const double* a, const double* b, std::size_t d) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

void require_linear_assumption(const LinearModel& m, const char* who) {
  // f(z) = grad f . z must hold exactly; the bias is the only violation a
  // linear scorer can have, and |f(z) - grad f . z| == |bias|.
  if (std::abs(m.bias) > 1e-9)
    throw std::invalid_argument(std::string(who) +
                                ": scorer violates f(z) == grad f . z (bias = " +
                                std::to_string(m.bias) + ")");
}

struct Perturbed {
  std::size_t n = 0, d = 0;
  std::vector<double> x;  // n x d perturbed points
  std::vector<double> f;  // per-example scores
  std::vector<double> g;  // sigmoid(f)

  const double* row(std::size_t i) const { return x.data() + i * d; }
};

Perturbed make_perturbed(const LinearModel& m, const TheoryData& data,
                         const AttackConfig& attack) {
  Perturbed p;
  p.n = data.n;
  p.d = data.d;
  p.x = perturb_linf(m, data, attack);
  p.f.resize(p.n);
  p.g.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    p.f[i] = m.score(p.row(i));
    p.g[i] = sigmoid(p.f[i]);
  }
  return p;
}

struct Moments {
  double e1 = 0.0;  // scale * E[1 - lambda]
  double e2 = 0.0;  // scale^2 * E[(1 - lambda)^2]
};

Moments scaled_moments(double alpha, double beta, double scale) {
  const DtildeMixture mix = dtilde_params(alpha, beta);
  return Moments{scale * mix.mean_one_minus_lambda(),
                 scale * scale * mix.mean_one_minus_lambda_sq()};
}

/// Mixed loss over exhaustive pairs at one effective coefficient mu:
/// (1/n^2) sum_{i,j} loss(mu f_i + (1-mu) f_j, y_i).
double pair_sum_reduced(const Perturbed& p, const std::vector<int>& y, double mu) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const double fi = p.f[i];
    const double yi = y[i];
    for (std::size_t j = 0; j < p.n; ++j)
      total += logistic_loss(mu * fi + (1.0 - mu) * p.f[j], yi);
  }
  return total / double(p.n * p.n);
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.draws = values.size();
  if (values.empty()) return est;
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / double(values.size() - 1) / double(values.size()));
  }
  return est;
}

/// Reduced-form Monte Carlo: lambda ~ Dtilde (optionally pre-drawn),
/// exhaustive pairs, labels of the first index, shrink factor `scale`.
McEstimate reduced_loss_mc(const Perturbed& p, const std::vector<int>& y,
                           const std::vector<double>& lambda_draws, double scale) {
  std::vector<double> values(lambda_draws.size());
  for (std::size_t t = 0; t < lambda_draws.size(); ++t) {
    const double mu = 1.0 - scale * (1.0 - lambda_draws[t]);
    values[t] = pair_sum_reduced(p, y, mu);
  }
  return summarize(values);
}

double base_loss_of(const Perturbed& p, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) total += logistic_loss(p.f[i], y[i]);
  return total / double(p.n);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(std::size_t k, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(k);
  weights.resize(k);
  for (std::size_t i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(M_PI * (double(i) + 0.75) / (double(k) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / double(j);
        p0 = p1;
        p1 = p2;
      }
      dp = double(k) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[k - 1 - i] = x;
    weights[i] = weights[k - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

double LinearModel::score(const double* x) const { return dot(w, x) + bias; }

LinearModel LinearModel::from_dense(const Model& m) {
  if (m.layers.size() != 1 || m.layers[0].kind != LayerKind::affine ||
      m.layers[0].out_dim != 1)
    throw std::invalid_argument(
        "theory: checks cover binary logistic-linear models only (single affine layer, "
        "one output)");
  LinearModel lm;
  lm.w = m.layers[0].w;
  lm.bias = m.layers[0].b.empty() ? 0.0 : m.layers[0].b[0];
  return lm;
}

void TheoryData::validate() const {
  if (n == 0 || d == 0 || x.size() != n * d || y.size() != n)
    throw std::invalid_argument("theory data: shape mismatch");
  for (int v : y)
    if (v != 0 && v != 1)
      throw std::invalid_argument("theory data: labels must be binary {0,1}");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(double q, double y) {
  // softplus(q) - y q
  const double softplus = q > 0.0 ? q + std::log1p(std::exp(-q)) : std::log1p(std::exp(q));
  return softplus - y * q;
}

std::vector<double> perturb_linf(const LinearModel& m, const TheoryData& data,
                                 const AttackConfig& attack) {
  data.validate();
  attack.validate();
  if (m.w.size() != data.d) throw std::invalid_argument("perturb_linf: dimension mismatch");
  std::vector<double> cur = data.x;
  for (int it = 0; it < attack.iterations; ++it) {
    for (std::size_t i = 0; i < data.n; ++i) {
      double* xi = cur.data() + i * data.d;
      const double resid = sigmoid(dot(m.w, xi) + m.bias) - double(data.y[i]);
      for (std::size_t k = 0; k < data.d; ++k) {
        const double step = attack.step_size * sgn(resid * m.w[k]);
        const double moved = xi[k] + step;
        const double delta =
            std::clamp(moved - data.row(i)[k], -attack.epsilon, attack.epsilon);
        xi[k] = std::clamp(data.row(i)[k] + delta, attack.lo, attack.hi);
      }
    }
  }
  return cur;
}

McEstimate adv_mixup_loss_mc(const LinearModel& m, const TheoryData& data, double alpha,
                             double beta, const AttackConfig& attack, std::size_t draws,
                             Rng& rng, PairStrategy strategy,
                             std::optional<double> lambda_override) {
  data.validate();
  if (data.n < 2) throw std::invalid_argument("adv_mixup_loss_mc: need n >= 2");
  const Perturbed p = make_perturbed(m, data, attack);

  std::vector<double> values(draws);
  for (std::size_t t = 0; t < draws; ++t) {
    const double lam =
        lambda_override ? *lambda_override : sample_lambda(alpha, beta, rng);
    if (strategy == PairStrategy::exhaustive) {
      double total = 0.0;
      for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t j = 0; j < p.n; ++j) {
          const double q = lam * p.f[i] + (1.0 - lam) * p.f[j];
          const double ymix = lam * data.y[i] + (1.0 - lam) * data.y[j];
          total += logistic_loss(q, ymix);
        }
      values[t] = total / double(p.n * p.n);
    } else {
      const std::size_t i = rng.index(p.n);
      const std::size_t j = rng.index(p.n);
      const double q = lam * p.f[i] + (1.0 - lam) * p.f[j];
      const double ymix = lam * data.y[i] + (1.0 - lam) * data.y[j];
      values[t] = logistic_loss(q, ymix);
    }
  }
  return summarize(values);
}

double dtilde_expectation(const DtildeMixture& mixture,
                          const std::function<double(double)>& g, std::size_t nodes) {
  if (mixture.alpha < 1.0 || mixture.beta < 1.0)
    throw std::invalid_argument("dtilde_expectation: needs alpha, beta >= 1");
  std::vector<double> xs, ws;
  gauss_legendre(nodes, xs, ws);
  double total = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double lam = 0.5 * (xs[k] + 1.0);  // map [-1,1] -> [0,1]
    total += 0.5 * ws[k] * mixture.pdf(lam) * g(lam);
  }
  return total;
}

namespace {

DecompositionReport decomposition_at_scale(const Perturbed& p, const std::vector<int>& y,
                                           double alpha, double beta, double scale,
                                           const std::vector<double>& lambda_draws) {
  const Moments mom = scaled_moments(alpha, beta, scale);
  DecompositionReport rep;
  rep.scale = scale;
  rep.base_loss = base_loss_of(p, y);

  double fbar = 0.0;
  for (double f : p.f) fbar += f;
  fbar /= double(p.n);

  double g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    g1 += (p.g[i] - double(y[i])) * (fbar - p.f[i]);
    double quad = 0.0;  // (1/n) sum_j (f_j - f_i)^2 == grad-weighted covariance
    for (std::size_t j = 0; j < p.n; ++j)
      quad += (p.f[j] - p.f[i]) * (p.f[j] - p.f[i]);
    g2 += p.g[i] * (1.0 - p.g[i]) * quad / double(p.n);
  }
  rep.g1 = mom.e1 * g1 / double(p.n);
  rep.g2 = mom.e2 * g2 / (2.0 * double(p.n));
  rep.g3 = 0.0;  // linear scorer, zero Hessian

  const McEstimate direct = reduced_loss_mc(p, y, lambda_draws, scale);
  rep.la_direct = direct.mean;
  rep.mc_std_error = direct.std_error;
  rep.draws = direct.draws;
  rep.residual = rep.la_direct - (rep.base_loss + rep.g1 + rep.g2 + rep.g3);
  return rep;
}

}  // namespace

DecompositionReport lemma1_decomposition(const LinearModel& m, const TheoryData& data,
                                         double alpha, double beta,
                                         const AttackConfig& attack, double scale,
                                         std::size_t draws, Rng& rng) {
  return lemma1_scaling(m, data, alpha, beta, attack, {scale}, draws, rng).front();
}

std::vector<DecompositionReport> lemma1_scaling(const LinearModel& m, const TheoryData& data,
                                                double alpha, double beta,
                                                const AttackConfig& attack,
                                                const std::vector<double>& scales,
                                                std::size_t draws, Rng& rng) {
  data.validate();
  if (data.n < 1) throw std::invalid_argument("lemma1: need n >= 1");
  const Perturbed p = make_perturbed(m, data, attack);
  const DtildeMixture mix = dtilde_params(alpha, beta);

  // Common draws across scales: the scale comparison then sees correlated
  // noise instead of independent noise.
  std::vector<double> lambda_draws(draws);
  for (auto& v : lambda_draws) v = mix.sample(rng);

  std::vector<DecompositionReport> out;
  out.reserve(scales.size());
  for (double s : scales)
    out.push_back(decomposition_at_scale(p, data.y, alpha, beta, s, lambda_draws));
  return out;
}

RegularizationReport theorem5_terms(const LinearModel& m, const TheoryData& data,
                                    double alpha, double beta, const AttackConfig& attack,
                                    double scale) {
  data.validate();
  require_linear_assumption(m, "theorem5_terms");
  const Perturbed p = make_perturbed(m, data, attack);
  const Moments mom = scaled_moments(alpha, beta, scale);
  const double wnorm = norm2(m.w.data(), m.w.size());
  const double sqrt_d = std::sqrt(double(p.d));

  RegularizationReport rep;
  rep.scale = scale;
  rep.e_one_minus = mom.e1;
  rep.e_one_minus_sq = mom.e2;
  rep.base_loss = base_loss_of(p, data.y);

  std::vector<double> rbar(p.d, 0.0);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t k = 0; k < p.d; ++k) rbar[k] += p.row(i)[k];
  for (auto& v : rbar) v /= double(p.n);
  const double zeta = dot(m.w, rbar.data());  // same for every example: grad f is constant

  double c1 = 0.0, c2 = 0.0, g1 = 0.0, g2 = 0.0;
  rep.c_x = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.n; ++i) {
    const double margin = p.f[i] - zeta;  // grad f . (x^_i - mean r)
    const double resid = double(data.y[i]) - p.g[i];
    // First-order coefficient, written against ||grad f||: the cosine pairs
    // grad f with the deviation of x^_i from the empirical mean.
    if (wnorm > 0.0) c1 += resid * margin / wnorm;
    g1 += resid * margin;
    const double curvature = p.g[i] * (1.0 - p.g[i]);
    c2 += std::abs(curvature);
    double quad = 0.0;
    for (std::size_t j = 0; j < p.n; ++j)
      quad += (p.f[j] - p.f[i]) * (p.f[j] - p.f[i]);
    quad /= double(p.n);
    g2 += std::abs(curvature) * quad;
    rep.grad_norm.push_back(wnorm);
    rep.grad_norm_sq_sigma.push_back(quad);
    rep.theta_prime_member.push_back((2 * data.y[i] - 1) * margin >= 0.0 ? 1 : 0);
    const double xnorm = norm2(p.row(i), p.d);
    rep.r_cos.push_back(std::abs(cosine(m.w.data(), p.row(i), p.d)));
    rep.c_x = std::min(rep.c_x, xnorm / sqrt_d);
  }
  rep.c1 = mom.e1 * c1 / double(p.n);
  rep.c2 = mom.e2 * c2 / (2.0 * double(p.n));
  rep.expansion_value =
      rep.base_loss + mom.e1 * g1 / double(p.n) + mom.e2 * g2 / (2.0 * double(p.n));
  for (std::size_t i = 0; i < p.n; ++i)
    rep.epsilon_mix.push_back(rep.r_cos[i] * rep.c_x * mom.e1 * sqrt_d);
  rep.q_hat = adversarial_gap(m, data, attack);
  return rep;
}

Prop1Result prop1_check(const LinearModel& m, const TheoryData& data,
                        const AttackConfig& attack, double alpha, double beta) {
  const RegularizationReport rep = theorem5_terms(m, data, alpha, beta, attack, 1.0);
  Prop1Result res;
  res.member = rep.theta_prime_member;
  res.all_member =
      std::all_of(res.member.begin(), res.member.end(), [](char c) { return c != 0; });
  res.c1 = rep.c1;
  return res;
}

Theorem1Result theorem1_check(const LinearModel& m, const TheoryData& data, double alpha,
                              double beta, const AttackConfig& attack, double scale,
                              std::size_t draws, Rng& rng) {
  data.validate();
  require_linear_assumption(m, "theorem1_check");
  const Perturbed p = make_perturbed(m, data, attack);
  const Moments mom = scaled_moments(alpha, beta, scale);
  const double sqrt_d = std::sqrt(double(p.d));
  const double wnorm = norm2(m.w.data(), m.w.size());

  Theorem1Result res;
  res.e_one_minus = mom.e1;
  res.draws = draws;

  // Centered perturbed data is an assumption, not something to fix up here.
  for (std::size_t k = 0; k < p.d; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) mean += p.row(i)[k];
    if (std::abs(mean / double(p.n)) > 1e-9) {
      res.precondition_note = "perturbed data is not centered";
      return res;
    }
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    if ((2 * data.y[i] - 1) * p.f[i] < 0.0) {
      res.precondition_note = "a perturbed point is misclassified";
      return res;
    }
  }
  res.precondition_met = true;

  res.c_x = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.n; ++i)
    res.c_x = std::min(res.c_x, norm2(p.row(i), p.d) / sqrt_d);

  double rhs = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const double r_i = std::abs(cosine(m.w.data(), p.row(i), p.d));
    const double eps_mix = r_i * res.c_x * mom.e1 * sqrt_d;
    res.epsilon_mix.push_back(eps_mix);
    // Worst l2 push of the logit for the true class: down for y=1, up for y=0.
    const double q = data.y[i] == 1 ? p.f[i] - eps_mix * wnorm : p.f[i] + eps_mix * wnorm;
    rhs += logistic_loss(q, data.y[i]);
  }
  res.rhs = rhs / double(p.n);

  const DtildeMixture mix = dtilde_params(alpha, beta);
  std::vector<double> lambda_draws(draws);
  for (auto& v : lambda_draws) v = mix.sample(rng);
  const McEstimate lhs = reduced_loss_mc(p, data.y, lambda_draws, scale);
  res.lhs = lhs.mean;
  res.lhs_std_error = lhs.std_error;
  res.gap = res.lhs - res.rhs;
  res.tolerance = 10.0 * mom.e1 * mom.e1 * mom.e1;
  return res;
}

double adversarial_gap(const LinearModel& m, const TheoryData& data,
                       const AttackConfig& attack, std::vector<std::string>* warnings) {
  data.validate();
  const Perturbed p = make_perturbed(m, data, attack);
  double gap = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    gap += logistic_loss(p.f[i], data.y[i]) -
           logistic_loss(m.score(data.row(i)), data.y[i]);
  gap /= double(p.n);
  if (gap < 0.0) {
    if (warnings)
      warnings->push_back("adversarial gap came out negative (" + std::to_string(gap) +
                          "); attack under-optimized, clamped to 0");
    gap = 0.0;
  }
  return gap;
}

Instance random_margin_instance(std::size_t n, std::size_t d, const AttackConfig& attack,
                                Rng& rng) {
  for (int tries = 0; tries < 1000; ++tries) {
    Instance inst;
    inst.model.w.resize(d);
    for (auto& v : inst.model.w) v = rng.normal();
    inst.data.n = n;
    inst.data.d = d;
    inst.data.x.resize(n * d);
    std::vector<double> center(d);
    for (auto& v : center) v = 0.5 * rng.normal();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k)
        inst.data.x[i * d + k] = center[k] + rng.normal();
    const double wc = dot(inst.model.w, center.data());
    inst.data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      inst.data.y[i] = dot(inst.model.w, inst.data.row(i)) >= wc ? 1 : 0;
    if (prop1_check(inst.model, inst.data, attack).all_member) return inst;
  }
  throw std::runtime_error("random_margin_instance: rejection sampling failed");
}

Instance symmetric_centered_instance(std::size_t pairs, std::size_t d,
                                     const AttackConfig& attack, Rng& rng) {
  if (pairs == 0 || d == 0) throw std::invalid_argument("symmetric instance: empty");
  Instance inst;
  inst.model.w.resize(d);
  for (auto& v : inst.model.w) v = rng.normal();
  double w1 = 0.0;
  for (double v : inst.model.w) w1 += std::abs(v);
  // Margin must survive the worst l-inf shift epsilon * ||w||_1.
  const double margin = attack.epsilon * w1 * 1.5 + 0.5;

  inst.data.n = 2 * pairs;
  inst.data.d = d;
  inst.data.x.resize(inst.data.n * d);
  inst.data.y.resize(inst.data.n);
  const double wnorm = norm2(inst.model.w.data(), d);
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<double> point(d);
    for (auto& v : point) v = rng.normal();
    double score = dot(inst.model.w, point.data());
    const double want = margin + std::abs(rng.normal());
    const double shift = (want - score) / (wnorm * wnorm);
    for (std::size_t k = 0; k < d; ++k) point[k] += shift * inst.model.w[k];
    for (std::size_t k = 0; k < d; ++k) {
      inst.data.x[(2 * i) * d + k] = point[k];
      inst.data.x[(2 * i + 1) * d + k] = -point[k];
    }
    inst.data.y[2 * i] = 1;
    inst.data.y[2 * i + 1] = 0;
  }
  return inst;
}

}  // namespace iat::theory
