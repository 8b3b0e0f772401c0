#include "iat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iat/linalg.hpp"
#include "iat/train.hpp"

namespace iat {

std::vector<RepMatrix> collect_representations(const Model& m, const Split& data,
                                               std::size_t boundary,
                                               std::vector<std::string>* warnings) {
  if (data.size() == 0) throw std::invalid_argument("collect_representations: empty data");
  const Tensor acts = activation_at(m, data.x, boundary);
  acts.require_finite("representations");
  int max_class = 0;
  for (int y : data.y) max_class = std::max(max_class, y);

  std::vector<RepMatrix> out;
  for (int cls = 0; cls <= max_class; ++cls) {
    RepMatrix rep;
    rep.class_id = cls;
    rep.cols = acts.cols();
    for (std::size_t r = 0; r < data.size(); ++r) {
      if (data.y[r] != cls) continue;
      rep.data.insert(rep.data.end(), acts.row(r), acts.row(r) + acts.cols());
      ++rep.rows;
    }
    if (rep.rows == 0) {
      if (warnings)
        warnings->push_back("class " + std::to_string(cls) + " has no examples; omitted");
      continue;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

double soft_rank(const RepMatrix& m) {
  if (m.rows == 0 || m.cols == 0) throw std::invalid_argument("soft_rank: empty matrix");
  const SvdResult dec = svd(m.data, m.rows, m.cols);
  const double sigma_max = dec.s.front();
  if (sigma_max <= 0.0) throw std::invalid_argument("soft_rank: all-zero matrix");
  double sum = 0.0;
  for (double s : dec.s) sum += s;
  return sum / sigma_max;
}

SpectrumReport spectrum_report(const Model& m, const Split& data, std::size_t boundary,
                               const std::string& model_id) {
  SpectrumReport report;
  report.model_id = model_id;
  report.boundary = boundary;
  for (const RepMatrix& rep : collect_representations(m, data, boundary)) {
    SpectrumRow row;
    row.class_id = rep.class_id;
    row.singular_values = svd(rep.data, rep.rows, rep.cols).s;
    row.soft_rank = soft_rank(rep);
    report.classes.push_back(std::move(row));
  }
  return report;
}

std::vector<LayerNorms> weight_norms(const Model& m) {
  std::vector<LayerNorms> out;
  std::size_t ordinal = 0;
  for (const Layer& l : m.layers) {
    if (l.kind != LayerKind::affine) continue;
    LayerNorms norms;
    norms.layer = ordinal++;
    norms.frobenius = frobenius_norm(l.w);
    norms.spectral = spectral_norm(l.w, l.out_dim, l.in_dim);
    out.push_back(norms);
  }
  if (out.empty()) throw std::invalid_argument("weight_norms: model has no affine layer");
  return out;
}

double random_label_probe(const Tensor& features, const ProbeConfig& cfg) {
  const std::size_t n = features.rows();
  const std::size_t dim = features.cols();
  if (n == 0 || dim == 0) throw std::invalid_argument("probe: empty features");
  features.require_finite("probe features");

  // Fixed labels: every compared model faces the same random assignment.
  Rng label_rng = Rng::derive(cfg.label_seed, 0);
  std::vector<int> labels(n);
  for (auto& y : labels) y = label_rng.uniform() < 0.5 ? 0 : 1;

  Model probe = make_mlp(dim, {cfg.hidden}, 2, cfg.probe_seed);
  SgdState sgd;
  Rng rng = Rng::derive(cfg.probe_seed, 1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = rng.permutation(n);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      Tensor bx = Tensor::zeros({end - begin, dim});
      std::vector<int> by(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        std::copy(features.row(order[k]), features.row(order[k]) + dim, bx.row(k - begin));
        by[k - begin] = labels[order[k]];
      }
      auto fwd = forward(probe, bx);
      auto loss = loss_ce(fwd.logits, one_hot(by, 2));
      auto bwd = backward(probe, fwd.tape, loss.dlogits);
      sgd_step(probe, bwd.grads, cfg.lr, cfg.momentum, sgd);
    }
  }

  const Tensor logits = predict(probe, features);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t pred = logits.at(r, 1) > logits.at(r, 0) ? 1 : 0;
    if (static_cast<int>(pred) == labels[r]) ++correct;
  }
  return 100.0 * double(correct) / double(n);
}

}  // namespace iat
