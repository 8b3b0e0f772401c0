#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iat/attacks.hpp"
#include "iat/mix.hpp"
#include "iat/nn.hpp"
#include "iat/rng.hpp"

namespace iat::theory {

/// Binary logistic-linear scorer f(z) = w.z (+ bias). The second-order
/// checks assume f(z) = grad f . z exactly, so they reject a nonzero bias.
struct LinearModel {
  std::vector<double> w;
  double bias = 0.0;

  double score(const double* x) const;
  /// Adapts a single-affine-output dense model; throws unless it is the
  /// binary logistic-linear shape these checks cover.
  static LinearModel from_dense(const Model& m);
};

struct TheoryData {
  std::size_t n = 0, d = 0;
  std::vector<double> x;  // n x d
  std::vector<int> y;     // {0, 1}

  const double* row(std::size_t i) const { return x.data() + i * d; }
  void validate() const;
};

double sigmoid(double z);
/// log(1 + e^q) - y*q, numerically stable; y may be a soft label in [0,1].
double logistic_loss(double q, double y);

/// l-inf signed-gradient attack against the logistic loss (iterations and
/// projection per the attack config). For a linear scorer the iterates
/// saturate at the exact worst case once the steps cover epsilon.
std::vector<double> perturb_linf(const LinearModel& m, const TheoryData& data,
                                 const AttackConfig& attack);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

enum class PairStrategy { exhaustive, sampled };

/// Monte-Carlo estimate of the interpolated adversarial loss
///   (1/n^2) sum_{i,j} E_{lambda~Beta(a,b)}
///     loss(f(lambda x^_i + (1-lambda) x^_j), lambda y_i + (1-lambda) y_j)
/// over the attack-perturbed points x^. `exhaustive` enumerates all pairs
/// per lambda draw (exact at a degenerate lambda); `sampled` draws one
/// (i, j) pair per lambda. `lambda_override` pins lambda for tests.
McEstimate adv_mixup_loss_mc(const LinearModel& m, const TheoryData& data, double alpha,
                             double beta, const AttackConfig& attack, std::size_t draws,
                             Rng& rng, PairStrategy strategy = PairStrategy::exhaustive,
                             std::optional<double> lambda_override = std::nullopt);

/// Expectation of g(lambda) against the folded mixture density, by
/// Gauss-Legendre quadrature; requires alpha, beta >= 1 so the density is
/// bounded on (0, 1).
double dtilde_expectation(const DtildeMixture& mixture,
                          const std::function<double(double)>& g, std::size_t nodes = 256);

/// Second-order decomposition of the interpolated adversarial loss around
/// the perturbed points:
///   base + G1 + G2 + G3 + remainder,  remainder = o(E[(1-lambda)^2]).
/// `scale` shrinks the interpolation strength: the effective mixing
/// coefficient becomes 1 - scale * (1 - lambda), so the first/second moment
/// factors scale by `scale` and `scale^2` and the remainder must vanish
/// faster than scale^2.
struct DecompositionReport {
  double scale = 1.0;
  double base_loss = 0.0;
  double g1 = 0.0, g2 = 0.0, g3 = 0.0;
  double la_direct = 0.0;    // Monte-Carlo value of the mixed loss
  double residual = 0.0;     // la_direct - (base + g1 + g2 + g3)
  double mc_std_error = 0.0;
  std::size_t draws = 0;
};

DecompositionReport lemma1_decomposition(const LinearModel& m, const TheoryData& data,
                                         double alpha, double beta,
                                         const AttackConfig& attack, double scale,
                                         std::size_t draws, Rng& rng);

/// Decomposition at several scales sharing one set of lambda draws, so the
/// residual-vs-scale comparison is not washed out by independent noise.
std::vector<DecompositionReport> lemma1_scaling(const LinearModel& m, const TheoryData& data,
                                                double alpha, double beta,
                                                const AttackConfig& attack,
                                                const std::vector<double>& scales,
                                                std::size_t draws, Rng& rng);

/// Regularization view of the same expansion: the first-order term as a
/// coefficient on ||grad f||, the second-order term as a coefficient on the
/// covariance-weighted squared gradient norm.
struct RegularizationReport {
  double scale = 1.0;
  double c1 = 0.0;  // coefficient on ||grad f||_2
  double c2 = 0.0;  // coefficient on ||grad f||^2_Sigma
  double base_loss = 0.0;
  double expansion_value = 0.0;  // base + G1 + G2, exact second order
  double e_one_minus = 0.0;      // scaled E[1 - lambda]
  double e_one_minus_sq = 0.0;   // scaled E[(1 - lambda)^2]
  std::vector<double> grad_norm;           // per-example ||grad f||_2
  std::vector<double> grad_norm_sq_sigma;  // per-example ||grad f||^2_Sigma_i
  std::vector<char> theta_prime_member;    // per-example margin flag
  std::vector<double> epsilon_mix;         // R_i * c_x * E[1-lambda] * sqrt(d)
  std::vector<double> r_cos;               // R_i = |cos(grad f, x^_i)|
  double c_x = 0.0;  // min_i ||x^_i|| / sqrt(d)
  double q_hat = 0.0;
};

RegularizationReport theorem5_terms(const LinearModel& m, const TheoryData& data,
                                    double alpha, double beta, const AttackConfig& attack,
                                    double scale = 1.0);

struct Prop1Result {
  std::vector<char> member;
  bool all_member = false;
  double c1 = 0.0;
};

/// Margin condition: (2y_i - 1) * (f(x^_i) - zeta_i) >= 0 with
/// zeta_i = grad f . mean(x^). When every example satisfies it, the
/// first-order coefficient is non-negative.
Prop1Result prop1_check(const LinearModel& m, const TheoryData& data,
                        const AttackConfig& attack, double alpha = 1.0, double beta = 1.0);

/// Lower-bound check: the interpolated adversarial loss dominates the plain
/// adversarial loss with an extra per-example l2 budget epsilon_mix_i, up to
/// a third-order tolerance. Requires centered perturbed data (refused, not
/// silently recentered) and every perturbed point classified correctly.
struct Theorem1Result {
  bool precondition_met = false;
  std::string precondition_note;
  double lhs = 0.0;  // Monte-Carlo mixed loss
  double lhs_std_error = 0.0;
  double rhs = 0.0;  // closed-form inner max, no attack suboptimality
  double gap = 0.0;  // lhs - rhs
  double tolerance = 0.0;  // 10 * E[1-lambda]^3
  std::vector<double> epsilon_mix;
  double c_x = 0.0;
  double e_one_minus = 0.0;
  std::size_t draws = 0;
};

Theorem1Result theorem1_check(const LinearModel& m, const TheoryData& data, double alpha,
                              double beta, const AttackConfig& attack, double scale,
                              std::size_t draws, Rng& rng);

/// Empirical adversarial gap: mean excess of the attacked loss over the
/// clean loss, PGD output standing in for the inner max. Tiny negatives
/// from attack suboptimality clamp to 0 with a warning.
double adversarial_gap(const LinearModel& m, const TheoryData& data,
                       const AttackConfig& attack,
                       std::vector<std::string>* warnings = nullptr);

/// Random separable instance whose perturbed points all satisfy the margin
/// condition of prop1_check; rejection-samples until one is found.
struct Instance {
  LinearModel model;
  TheoryData data;
};
Instance random_margin_instance(std::size_t n, std::size_t d, const AttackConfig& attack,
                                Rng& rng);

/// Symmetric separable instance: points are mirrored through the origin so
/// the perturbed set is exactly centered, and margins exceed the attack
/// budget so every perturbed point stays correctly classified.
Instance symmetric_centered_instance(std::size_t pairs, std::size_t d,
                                     const AttackConfig& attack, Rng& rng);

}  // namespace iat::theory
