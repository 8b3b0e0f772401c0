#pragma once

// Shared oracles for the unit and acceptance suites. The gradient oracle
// goes through forward + loss only, never through backward, so it stays an
// independent check of the reverse pass.

#include <cmath>
#include <optional>
#include <vector>

#include "iat/nn.hpp"

namespace iat::testutil {

inline double loss_of(const Model& m, const Tensor& x, const Tensor& y,
                      const std::optional<Injection>& inj) {
  auto fwd = forward(m, x, inj);
  return loss_ce(fwd.logits, y).loss;
}

struct FdCheck {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

inline double rel_err(double analytic, double numeric) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

/// Central finite differences over every parameter of the model.
inline FdCheck fd_check_params(Model m, const Tensor& x, const Tensor& y,
                               const std::optional<Injection>& inj,
                               const Gradients& analytic, double h = 1e-5) {
  FdCheck res;
  std::size_t affine_idx = 0;
  for (auto& layer : m.layers) {
    if (layer.kind != LayerKind::affine) continue;
    const AffineGrad& ag = analytic.affine[affine_idx];
    for (std::size_t k = 0; k < layer.w.size(); ++k) {
      const double saved = layer.w[k];
      layer.w[k] = saved + h;
      const double up = loss_of(m, x, y, inj);
      layer.w[k] = saved - h;
      const double down = loss_of(m, x, y, inj);
      layer.w[k] = saved;
      res.max_rel_err = std::max(res.max_rel_err, rel_err(ag.dw[k], (up - down) / (2 * h)));
      ++res.checked;
    }
    for (std::size_t k = 0; k < layer.b.size(); ++k) {
      const double saved = layer.b[k];
      layer.b[k] = saved + h;
      const double up = loss_of(m, x, y, inj);
      layer.b[k] = saved - h;
      const double down = loss_of(m, x, y, inj);
      layer.b[k] = saved;
      res.max_rel_err = std::max(res.max_rel_err, rel_err(ag.db[k], (up - down) / (2 * h)));
      ++res.checked;
    }
    ++affine_idx;
  }
  return res;
}

/// Central finite differences over every input coordinate.
inline FdCheck fd_check_inputs(const Model& m, Tensor x, const Tensor& y,
                               const std::optional<Injection>& inj, const Tensor& analytic,
                               double h = 1e-5) {
  FdCheck res;
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    const double saved = x.data[k];
    x.data[k] = saved + h;
    const double up = loss_of(m, x, y, inj);
    x.data[k] = saved - h;
    const double down = loss_of(m, x, y, inj);
    x.data[k] = saved;
    res.max_rel_err =
        std::max(res.max_rel_err, rel_err(analytic.data[k], (up - down) / (2 * h)));
    ++res.checked;
  }
  return res;
}

}  // namespace iat::testutil
