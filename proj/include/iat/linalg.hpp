#pragma once

#include <cstddef>
#include <vector>

namespace iat {

/// Thin SVD A = U * diag(s) * V^T with k = min(rows, cols) columns.
/// Singular values are non-negative and sorted descending.
struct SvdResult {
  std::size_t rows = 0, cols = 0, k = 0;
  std::vector<double> u;  // rows x k, row-major
  std::vector<double> s;  // k
  std::vector<double> v;  // cols x k, row-major
};

/// One-sided Jacobi SVD; robust at up to a few hundred columns.
SvdResult svd(const std::vector<double>& a, std::size_t rows, std::size_t cols);

double frobenius_norm(const std::vector<double>& a);

/// Largest singular value by power iteration on A^T A, deterministic start,
/// converged to `rel_tol` on successive estimates.
double spectral_norm(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                     double rel_tol = 1e-8, std::size_t max_iters = 100000);

}  // namespace iat
