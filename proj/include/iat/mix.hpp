#pragma once

#include <cstddef>
#include <vector>

#include "iat/nn.hpp"
#include "iat/rng.hpp"

namespace iat {

enum class MixMode { none, input, manifold };

const char* to_string(MixMode mode);
MixMode mix_mode_from_string(const std::string& s);

/// Interpolation policy: lambda ~ Beta(alpha, beta), one draw per batch.
/// eligible_layers are block-boundary indices (0 = input) used in manifold
/// mode only.
struct MixPolicy {
  MixMode mode = MixMode::none;
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<std::size_t> eligible_layers;

  void validate() const;
};

/// One realized interpolation: shared lambda, a batch pairing, a boundary.
struct MixDraw {
  double lambda = 1.0;
  std::vector<std::size_t> permutation;
  std::size_t layer_index = 0;
};

/// One Beta(alpha, beta) draw built from two Gamma draws.
double sample_lambda(double alpha, double beta, Rng& rng);

/// mode none returns lambda = 1 with the identity pairing and consumes no
/// randomness, so a no-mix run stays bit-identical to a plain one.
MixDraw make_draw(const MixPolicy& policy, std::size_t batch_size, Rng& rng);

struct MixedLoss {
  double loss = 0.0;
  Tensor dlogits;
  GradTape tape;
};

/// Forward with the draw's injection and cross-entropy against the mixed
/// label lambda * y + (1 - lambda) * y[perm]. By linearity of the loss in
/// the label this equals the lambda-weighted sum of the two plain losses.
MixedLoss mixed_loss(const Model& m, const Tensor& x, const Tensor& y, const MixDraw& draw);

/// The mixture distribution that governs the effective interpolation
/// coefficient once the pairing symmetry is folded in:
/// weight1 * Beta(alpha+1, beta) + weight2 * Beta(beta+1, alpha)
/// with weight1 = alpha/(alpha+beta). Closed-form moments:
///   E[1-lambda]   = 2ab / ((a+b)(a+b+1))
///   E[(1-lambda)^2] = ab / ((a+b)(a+b+1))
struct DtildeMixture {
  double alpha = 1.0;
  double beta = 1.0;
  double weight1 = 0.5;
  double weight2 = 0.5;
  double a1 = 2.0, b1 = 1.0;  // first component shapes
  double a2 = 2.0, b2 = 1.0;  // second component shapes

  double mean_lambda() const;
  double mean_one_minus_lambda() const;
  double mean_one_minus_lambda_sq() const;
  double sample(Rng& rng) const;
  /// Density at lambda in (0, 1); requires both exponents to be finite there.
  double pdf(double lambda) const;
};

DtildeMixture dtilde_params(double alpha, double beta);

}  // namespace iat
