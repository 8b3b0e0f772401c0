#include "iat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "iat/rng.hpp"

namespace iat {

namespace {

/// One-sided Jacobi on the columns of A (rows x cols, rows >= cols):
/// rotates column pairs until they are mutually orthogonal. On exit the
/// column norms are the singular values and V accumulates the rotations.
void jacobi_columns(std::vector<double>& a, std::size_t rows, std::size_t cols,
                    std::vector<double>& v) {
  v.assign(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) v[i * cols + i] = 1.0;

  const double eps = 1e-15;
  const std::size_t max_sweeps = 64;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          const double vp = a[r * cols + p];
          const double vq = a[r * cols + q];
          app += vp * vp;
          aqq += vq * vq;
          apq += vp * vq;
        }
        if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double vp = a[r * cols + p];
          const double vq = a[r * cols + q];
          a[r * cols + p] = c * vp - s * vq;
          a[r * cols + q] = s * vp + c * vq;
        }
        for (std::size_t r = 0; r < cols; ++r) {
          const double vp = v[r * cols + p];
          const double vq = v[r * cols + q];
          v[r * cols + p] = c * vp - s * vq;
          v[r * cols + q] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

std::vector<double> transpose(const std::vector<double>& a, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> t(a.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = a[r * cols + c];
  return t;
}

}  // namespace

SvdResult svd(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || a.size() != rows * cols)
    throw std::invalid_argument("svd: bad matrix shape");

  // Work with the tall orientation so the Jacobi sweep touches min-dim pairs.
  const bool transposed = rows < cols;
  std::vector<double> work = transposed ? transpose(a, rows, cols) : a;
  const std::size_t wr = transposed ? cols : rows;
  const std::size_t wc = transposed ? rows : cols;

  std::vector<double> v;
  jacobi_columns(work, wr, wc, v);

  // Column norms are the singular values; normalized columns form U.
  std::vector<double> sigma(wc);
  for (std::size_t c = 0; c < wc; ++c) {
    double norm2 = 0.0;
    for (std::size_t r = 0; r < wr; ++r) norm2 += work[r * wc + c] * work[r * wc + c];
    sigma[c] = std::sqrt(norm2);
  }

  std::vector<std::size_t> idx(wc);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return sigma[i] > sigma[j];
  });

  SvdResult res;
  res.k = wc;
  std::vector<double> u_sorted(wr * wc), v_sorted(wc * wc), s_sorted(wc);
  for (std::size_t c = 0; c < wc; ++c) {
    const std::size_t src = idx[c];
    s_sorted[c] = sigma[src];
    const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
    for (std::size_t r = 0; r < wr; ++r) u_sorted[r * wc + c] = work[r * wc + src] * inv;
    for (std::size_t r = 0; r < wc; ++r) v_sorted[r * wc + c] = v[r * wc + src];
  }

  res.s = std::move(s_sorted);
  if (!transposed) {
    res.rows = rows;
    res.cols = cols;
    res.u = std::move(u_sorted);
    res.v = std::move(v_sorted);
  } else {
    // A = U S V^T  <=>  A^T = V S U^T
    res.rows = rows;
    res.cols = cols;
    res.u = std::move(v_sorted);  // rows x k
    res.v = std::move(u_sorted);  // cols x k
  }
  return res;
}

double frobenius_norm(const std::vector<double>& a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  return std::sqrt(sum);
}

double spectral_norm(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                     double rel_tol, std::size_t max_iters) {
  if (rows == 0 || cols == 0 || a.size() != rows * cols)
    throw std::invalid_argument("spectral_norm: bad matrix shape");

  Rng rng(0x5eedULL);
  std::vector<double> v(cols);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  double vnorm = frobenius_norm(v);
  for (auto& x : v) x /= vnorm;

  std::vector<double> av(rows), atav(cols);
  double sigma_prev = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      const double* row = a.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += row[c] * v[c];
      av[r] = acc;
    }
    std::fill(atav.begin(), atav.end(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = a.data() + r * cols;
      const double w = av[r];
      for (std::size_t c = 0; c < cols; ++c) atav[c] += row[c] * w;
    }
    const double sigma = frobenius_norm(av);
    const double norm = frobenius_norm(atav);
    if (norm == 0.0) return 0.0;  // v landed in the null space of a zero matrix
    for (std::size_t c = 0; c < cols; ++c) v[c] = atav[c] / norm;
    if (it > 0 && std::abs(sigma - sigma_prev) <= rel_tol * std::max(sigma, 1e-300))
      return sigma;
    sigma_prev = sigma;
  }
  return sigma_prev;
}

}  // namespace iat
