#include "sensprune/matrix.hpp"

#include <cmath>
#include <string>

#include "sensprune/error.hpp"

namespace sensprune {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "Matrix: " + std::to_string(data_.size()) +
                                              " values for a " + std::to_string(rows_) + "x" +
                                              std::to_string(cols_) + " matrix");
  }
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != element_count(shape)) {
    throw Error(ErrorCode::ShapeMismatch, "Tensor: data size does not match shape");
  }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

}  // namespace sensprune
