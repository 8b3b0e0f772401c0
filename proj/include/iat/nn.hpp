#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iat/rng.hpp"
#include "iat/tensor.hpp"

namespace iat {

enum class LayerKind { affine, relu };

struct Layer {
  LayerKind kind = LayerKind::relu;
  std::size_t in_dim = 0;   // affine only
  std::size_t out_dim = 0;  // affine only
  std::vector<double> w;    // affine only, out_dim x in_dim row-major
  std::vector<double> b;    // affine only, out_dim (empty when bias-free)
};

/// Dense feed-forward network: an ordered list of affine / relu layers.
/// Interpolation boundaries are counted at block granularity, where a block
/// is an affine layer together with an immediately following relu:
/// boundary 0 is the raw input, boundary k the output of the k-th block,
/// and the final boundary is the logits.
struct Model {
  std::vector<Layer> layers;
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
  std::uint64_t seed = 0;

  /// boundary index -> number of leading layers applied at that boundary.
  std::vector<std::size_t> boundaries() const;
  /// Feature width of the activation at a boundary.
  std::size_t boundary_dim(std::size_t boundary) const;

  std::size_t param_count() const;
  /// Checks layer dimension chaining and the final out-dim.
  void validate() const;
};

/// He-uniform affine weights, zero biases, all draws pinned to `seed`.
Model make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
               std::size_t class_count, std::uint64_t seed, bool with_bias = true);

/// Replaces the hidden state h at `boundary` with
/// lambda * h + (1 - lambda) * h[permutation] before the pass continues.
struct Injection {
  std::size_t boundary = 0;
  double lambda = 1.0;
  std::vector<std::size_t> permutation;
};

/// Activations cached by one forward pass, consumed exactly once by backward.
struct GradTape {
  const Model* model = nullptr;
  std::vector<Tensor> layer_inputs;  // input seen by each layer, post-mix
  Tensor logits;
  std::optional<Injection> injection;
};

struct ForwardResult {
  Tensor logits;
  GradTape tape;
};

/// Forward pass with optional hidden-state interpolation.
ForwardResult forward(const Model& m, const Tensor& x,
                      const std::optional<Injection>& injection = std::nullopt);

/// Forward without a tape (evaluation only).
Tensor predict(const Model& m, const Tensor& x);

/// Hidden activation at a block boundary (boundary == last -> logits).
Tensor activation_at(const Model& m, const Tensor& x, std::size_t boundary);

// ---------------------------------------------------------------------------
// Losses and labels
// ---------------------------------------------------------------------------

/// Batch of per-class probability rows: entries in [0,1], each row sums to 1.
void validate_soft_labels(const Tensor& y, double tol = 1e-9);

Tensor one_hot(const std::vector<int>& labels, std::size_t class_count);

/// lambda * y + (1 - lambda) * y[perm]; exact at lambda == 1.
Tensor mix_labels(const Tensor& y, const std::vector<std::size_t>& perm, double lambda);

struct LossResult {
  double loss = 0.0;
  Tensor dlogits;  // (softmax - y) / batch
};

/// Mean softmax cross-entropy against soft labels, log-sum-exp stabilized.
LossResult loss_ce(const Tensor& logits, const Tensor& labels);

// ---------------------------------------------------------------------------
// Backward and SGD
// ---------------------------------------------------------------------------

struct AffineGrad {
  std::vector<double> dw;
  std::vector<double> db;
};

/// One entry per affine layer of the model, in layer order.
struct Gradients {
  std::vector<AffineGrad> affine;
};

struct BackwardResult {
  Gradients grads;
  Tensor input_grad;
};

/// Exact reverse-mode gradients for parameters and inputs. When the tape
/// records an injection, gradients flow through both mixing branches.
BackwardResult backward(const Model& m, const GradTape& tape, const Tensor& dlogits);

/// Input gradient only; skips the parameter-gradient accumulation, which
/// attack inner loops never need.
Tensor input_gradient(const Model& m, const GradTape& tape, const Tensor& dlogits);

struct SgdState {
  std::vector<AffineGrad> velocity;  // zero-initialized lazily to grad shapes
};

/// Classical momentum: v <- momentum * v + g; theta <- theta - lr * v.
/// Throws on non-finite gradients, naming the offending layer.
void sgd_step(Model& m, const Gradients& grads, double lr, double momentum, SgdState& state);

}  // namespace iat
