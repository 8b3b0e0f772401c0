#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace iat {

/// Dense row-major array of 64-bit floats. Most of the code works with
/// rank-2 tensors (batch x features); rank-1 is allowed for vectors.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t numel() const;
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols(); }
  double* row(std::size_t r) { return data.data() + r * cols(); }

  bool all_finite() const;
  /// Throws std::runtime_error naming `what` if any entry is NaN/Inf.
  void require_finite(const std::string& what) const;
};

}  // namespace iat
