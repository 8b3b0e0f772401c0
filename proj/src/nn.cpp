#include "iat/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iat {

namespace {

bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) return false;
  return true;
}

void check_permutation(const std::vector<std::size_t>& perm, std::size_t batch) {
  if (perm.size() != batch)
    throw std::invalid_argument("injection: permutation size != batch size");
  std::vector<char> seen(batch, 0);
  for (std::size_t v : perm) {
    if (v >= batch || seen[v]) throw std::invalid_argument("injection: not a bijection");
    seen[v] = 1;
  }
}

/// y (batch x out) = x (batch x in) * W^T + b
void affine_forward(const Layer& l, const Tensor& x, Tensor& y) {
  const std::size_t batch = x.rows();
  for (std::size_t r = 0; r < batch; ++r) {
    const double* xr = x.row(r);
    double* yr = y.row(r);
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      const double* wr = l.w.data() + o * l.in_dim;
      double acc = l.b.empty() ? 0.0 : l.b[o];
      for (std::size_t i = 0; i < l.in_dim; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
}

void apply_mix(Tensor& h, const Injection& inj) {
  const std::size_t batch = h.rows();
  const std::size_t dim = h.cols();
  const double lam = inj.lambda;
  Tensor mixed = Tensor::zeros({batch, dim});
  for (std::size_t r = 0; r < batch; ++r) {
    const double* a = h.row(r);
    const double* b = h.row(inj.permutation[r]);
    double* out = mixed.row(r);
    for (std::size_t c = 0; c < dim; ++c) out[c] = lam * a[c] + (1.0 - lam) * b[c];
  }
  h = std::move(mixed);
}

}  // namespace

std::vector<std::size_t> Model::boundaries() const {
  std::vector<std::size_t> b{0};
  std::size_t pos = 0;
  while (pos < layers.size()) {
    if (layers[pos].kind == LayerKind::affine) {
      ++pos;
      if (pos < layers.size() && layers[pos].kind == LayerKind::relu) ++pos;
    } else {
      ++pos;  // bare relu forms its own block
    }
    b.push_back(pos);
  }
  return b;
}

std::size_t Model::boundary_dim(std::size_t boundary) const {
  const auto bs = boundaries();
  if (boundary >= bs.size()) throw std::invalid_argument("boundary out of range");
  std::size_t dim = input_dim;
  for (std::size_t k = 0; k < bs[boundary]; ++k)
    if (layers[k].kind == LayerKind::affine) dim = layers[k].out_dim;
  return dim;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    if (l.kind == LayerKind::affine) n += l.w.size() + l.b.size();
  return n;
}

void Model::validate() const {
  std::size_t dim = input_dim;
  std::size_t last_affine_out = 0;
  for (const auto& l : layers) {
    if (l.kind != LayerKind::affine) continue;
    if (l.in_dim != dim)
      throw std::invalid_argument("Model: affine in-dim " + std::to_string(l.in_dim) +
                                  " does not chain from " + std::to_string(dim));
    if (l.w.size() != l.in_dim * l.out_dim)
      throw std::invalid_argument("Model: weight size mismatch");
    if (!l.b.empty() && l.b.size() != l.out_dim)
      throw std::invalid_argument("Model: bias size mismatch");
    dim = l.out_dim;
    last_affine_out = l.out_dim;
  }
  if (last_affine_out != class_count)
    throw std::invalid_argument("Model: final affine out-dim != class_count");
}

Model make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
               std::size_t class_count, std::uint64_t seed, bool with_bias) {
  Model m;
  m.input_dim = input_dim;
  m.class_count = class_count;
  m.seed = seed;

  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(class_count);

  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer aff;
    aff.kind = LayerKind::affine;
    aff.in_dim = dims[k];
    aff.out_dim = dims[k + 1];
    aff.w.resize(aff.in_dim * aff.out_dim);
    if (with_bias) aff.b.assign(aff.out_dim, 0.0);
    Rng rng = Rng::derive(seed, k);
    const double limit = std::sqrt(6.0 / static_cast<double>(aff.in_dim));
    for (auto& v : aff.w) v = rng.uniform(-limit, limit);
    m.layers.push_back(std::move(aff));
    if (k + 2 < dims.size()) m.layers.push_back(Layer{LayerKind::relu, 0, 0, {}, {}});
  }
  m.validate();
  return m;
}

ForwardResult forward(const Model& m, const Tensor& x,
                      const std::optional<Injection>& injection) {
  if (x.cols() != m.input_dim) throw std::invalid_argument("forward: input dim mismatch");
  const auto bounds = m.boundaries();
  std::size_t inject_pos = SIZE_MAX;
  bool inject_active = false;
  if (injection) {
    if (injection->boundary >= bounds.size())
      throw std::invalid_argument("forward: injection at non-existent boundary");
    check_permutation(injection->permutation, x.rows());
    // lambda == 1 with an identity pairing is a no-op; skipping it keeps the
    // pass bit-identical to a plain forward.
    inject_active = !(injection->lambda == 1.0 && is_identity(injection->permutation));
    inject_pos = bounds[injection->boundary];
  }

  ForwardResult out;
  out.tape.model = &m;
  out.tape.layer_inputs.reserve(m.layers.size());
  if (inject_active) out.tape.injection = *injection;

  Tensor h = x;
  for (std::size_t pos = 0; pos <= m.layers.size(); ++pos) {
    if (inject_active && pos == inject_pos) apply_mix(h, *injection);
    if (pos == m.layers.size()) break;
    const Layer& l = m.layers[pos];
    if (l.kind == LayerKind::affine) {
      Tensor y = Tensor::zeros({h.rows(), l.out_dim});
      affine_forward(l, h, y);
      out.tape.layer_inputs.push_back(std::move(h));
      h = std::move(y);
    } else {
      Tensor y = h;
      for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
      out.tape.layer_inputs.push_back(std::move(h));
      h = std::move(y);
    }
  }
  h.require_finite("forward logits");
  out.logits = h;
  out.tape.logits = std::move(h);
  return out;
}

Tensor predict(const Model& m, const Tensor& x) {
  if (x.cols() != m.input_dim) throw std::invalid_argument("predict: input dim mismatch");
  Tensor h = x;
  for (const Layer& l : m.layers) {
    if (l.kind == LayerKind::affine) {
      Tensor y = Tensor::zeros({h.rows(), l.out_dim});
      affine_forward(l, h, y);
      h = std::move(y);
    } else {
      for (auto& v : h.data) v = v > 0.0 ? v : 0.0;
    }
  }
  return h;
}

Tensor activation_at(const Model& m, const Tensor& x, std::size_t boundary) {
  const auto bounds = m.boundaries();
  if (boundary >= bounds.size()) throw std::invalid_argument("activation_at: bad boundary");
  Tensor h = x;
  for (std::size_t pos = 0; pos < bounds[boundary]; ++pos) {
    const Layer& l = m.layers[pos];
    if (l.kind == LayerKind::affine) {
      Tensor y = Tensor::zeros({h.rows(), l.out_dim});
      affine_forward(l, h, y);
      h = std::move(y);
    } else {
      for (auto& v : h.data) v = v > 0.0 ? v : 0.0;
    }
  }
  return h;
}

void validate_soft_labels(const Tensor& y, double tol) {
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) {
      const double v = y.at(r, c);
      if (v < 0.0 || v > 1.0) throw std::invalid_argument("soft label entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw std::invalid_argument("soft label row does not sum to 1");
  }
}

Tensor one_hot(const std::vector<int>& labels, std::size_t class_count) {
  Tensor y = Tensor::zeros({labels.size(), class_count});
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= class_count)
      throw std::invalid_argument("one_hot: label out of range");
    y.at(r, static_cast<std::size_t>(labels[r])) = 1.0;
  }
  return y;
}

Tensor mix_labels(const Tensor& y, const std::vector<std::size_t>& perm, double lambda) {
  check_permutation(perm, y.rows());
  Tensor out = Tensor::zeros({y.rows(), y.cols()});
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const double* a = y.row(r);
    const double* b = y.row(perm[r]);
    double* o = out.row(r);
    for (std::size_t c = 0; c < y.cols(); ++c) o[c] = lambda * a[c] + (1.0 - lambda) * b[c];
  }
  return out;
}

LossResult loss_ce(const Tensor& logits, const Tensor& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
    throw std::invalid_argument("loss_ce: logits/labels shape mismatch");
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  if (batch == 0) throw std::invalid_argument("loss_ce: empty batch");

  LossResult res;
  res.dlogits = Tensor::zeros({batch, classes});
  double total = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    const double* q = logits.row(r);
    const double* y = labels.row(r);
    double qmax = q[0];
    for (std::size_t c = 1; c < classes; ++c) qmax = std::max(qmax, q[c]);
    double sum_exp = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum_exp += std::exp(q[c] - qmax);
    const double lse = qmax + std::log(sum_exp);
    double dot = 0.0;
    for (std::size_t c = 0; c < classes; ++c) dot += y[c] * q[c];
    total += lse - dot;  // == -sum_c y_c log softmax_c for rows summing to 1
    double* g = res.dlogits.row(r);
    for (std::size_t c = 0; c < classes; ++c)
      g[c] = (std::exp(q[c] - lse) - y[c]) * inv_batch;
  }
  res.loss = total * inv_batch;
  if (!std::isfinite(res.loss)) throw std::runtime_error("loss_ce: non-finite loss");
  return res;
}

namespace {

Tensor reverse_walk(const Model& m, const GradTape& tape, const Tensor& dlogits,
                    Gradients* grads) {
  if (tape.model != &m) throw std::invalid_argument("backward: tape was built on another model");
  if (tape.layer_inputs.size() != m.layers.size())
    throw std::invalid_argument("backward: tape/model layer count mismatch");
  if (dlogits.rows() != tape.logits.rows() || dlogits.cols() != tape.logits.cols())
    throw std::invalid_argument("backward: dlogits shape mismatch");

  const auto bounds = m.boundaries();
  std::size_t inject_pos = SIZE_MAX;
  std::vector<std::size_t> perm_inv;
  if (tape.injection) {
    inject_pos = bounds[tape.injection->boundary];
    perm_inv.resize(tape.injection->permutation.size());
    for (std::size_t i = 0; i < perm_inv.size(); ++i)
      perm_inv[tape.injection->permutation[i]] = i;
  }

  std::size_t n_affine = 0;
  for (const auto& l : m.layers)
    if (l.kind == LayerKind::affine) ++n_affine;
  if (grads) grads->affine.resize(n_affine);

  // d/d h_pre[j] = lambda * g[j] + (1 - lambda) * g[perm_inv[j]]
  const auto unmix = [&](Tensor& grad) {
    const double lam = tape.injection->lambda;
    Tensor unmixed = Tensor::zeros({grad.rows(), grad.cols()});
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      const double* a = grad.row(r);
      const double* b = grad.row(perm_inv[r]);
      double* o = unmixed.row(r);
      for (std::size_t c = 0; c < grad.cols(); ++c)
        o[c] = lam * a[c] + (1.0 - lam) * b[c];
    }
    grad = std::move(unmixed);
  };

  Tensor g = dlogits;
  if (tape.injection && inject_pos == m.layers.size()) unmix(g);
  std::size_t affine_idx = n_affine;
  for (std::size_t pos = m.layers.size(); pos-- > 0;) {
    const Layer& l = m.layers[pos];
    const Tensor& in = tape.layer_inputs[pos];
    if (l.kind == LayerKind::affine) {
      --affine_idx;
      const std::size_t batch = in.rows();
      if (grads) {
        AffineGrad& ag = grads->affine[affine_idx];
        ag.dw.assign(l.in_dim * l.out_dim, 0.0);
        if (!l.b.empty()) ag.db.assign(l.out_dim, 0.0);
        for (std::size_t r = 0; r < batch; ++r) {
          const double* gr = g.row(r);
          const double* ir = in.row(r);
          for (std::size_t o = 0; o < l.out_dim; ++o) {
            const double go = gr[o];
            if (go == 0.0) continue;
            double* dwr = ag.dw.data() + o * l.in_dim;
            for (std::size_t i = 0; i < l.in_dim; ++i) dwr[i] += go * ir[i];
            if (!l.b.empty()) ag.db[o] += go;
          }
        }
      }
      Tensor gprev = Tensor::zeros({batch, l.in_dim});
      for (std::size_t r = 0; r < batch; ++r) {
        const double* gr = g.row(r);
        double* pr = gprev.row(r);
        for (std::size_t o = 0; o < l.out_dim; ++o) {
          const double go = gr[o];
          if (go == 0.0) continue;
          const double* wr = l.w.data() + o * l.in_dim;
          for (std::size_t i = 0; i < l.in_dim; ++i) pr[i] += go * wr[i];
        }
      }
      g = std::move(gprev);
    } else {
      Tensor gprev = g;
      for (std::size_t k = 0; k < gprev.data.size(); ++k)
        if (in.data[k] <= 0.0) gprev.data[k] = 0.0;
      g = std::move(gprev);
    }
    if (tape.injection && pos == inject_pos) unmix(g);
  }
  return g;
}

}  // namespace

BackwardResult backward(const Model& m, const GradTape& tape, const Tensor& dlogits) {
  BackwardResult out;
  out.input_grad = reverse_walk(m, tape, dlogits, &out.grads);
  return out;
}

Tensor input_gradient(const Model& m, const GradTape& tape, const Tensor& dlogits) {
  return reverse_walk(m, tape, dlogits, nullptr);
}

void sgd_step(Model& m, const Gradients& grads, double lr, double momentum, SgdState& state) {
  std::size_t n_affine = 0;
  for (const auto& l : m.layers)
    if (l.kind == LayerKind::affine) ++n_affine;
  if (grads.affine.size() != n_affine)
    throw std::invalid_argument("sgd_step: gradient/model layer mismatch");
  if (state.velocity.empty()) state.velocity.resize(n_affine);

  std::size_t idx = 0;
  for (auto& l : m.layers) {
    if (l.kind != LayerKind::affine) continue;
    const AffineGrad& g = grads.affine[idx];
    if (g.dw.size() != l.w.size() || g.db.size() != l.b.size())
      throw std::invalid_argument("sgd_step: gradient shape mismatch at affine layer " +
                                  std::to_string(idx));
    for (double v : g.dw)
      if (!std::isfinite(v))
        throw std::runtime_error("sgd_step: non-finite weight gradient at affine layer " +
                                 std::to_string(idx));
    for (double v : g.db)
      if (!std::isfinite(v))
        throw std::runtime_error("sgd_step: non-finite bias gradient at affine layer " +
                                 std::to_string(idx));
    AffineGrad& vel = state.velocity[idx];
    if (vel.dw.empty()) vel.dw.assign(l.w.size(), 0.0);
    if (vel.db.empty() && !l.b.empty()) vel.db.assign(l.b.size(), 0.0);
    for (std::size_t k = 0; k < l.w.size(); ++k) {
      vel.dw[k] = momentum * vel.dw[k] + g.dw[k];
      l.w[k] -= lr * vel.dw[k];
    }
    for (std::size_t k = 0; k < l.b.size(); ++k) {
      vel.db[k] = momentum * vel.db[k] + g.db[k];
      l.b[k] -= lr * vel.db[k];
    }
    ++idx;
  }
}

}  // namespace iat
