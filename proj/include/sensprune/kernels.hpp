#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both compute each output element with the same operation
// order, so their results are bit-identical.

#include <cstddef>
#include <span>

#include "sensprune/activation.hpp"
#include "sensprune/matrix.hpp"

namespace sensprune::kernels {

enum class Exec { serial, parallel };

/// y = W x + b (pre-activation of a dense layer).
void dense_linear_serial(const Matrix& weights, std::span<const double> bias,
                         std::span<const double> x, std::span<double> y);
void dense_linear_parallel(const Matrix& weights, std::span<const double> bias,
                           std::span<const double> x, std::span<double> y);

struct ConvGeometry {
  std::size_t in_channels = 0, in_height = 0, in_width = 0;
  std::size_t out_channels = 0, kernel_height = 0, kernel_width = 0;
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;

  std::size_t out_height() const noexcept {
    return (in_height + 2 * pad_h - kernel_height) / stride_h + 1;
  }
  std::size_t out_width() const noexcept {
    return (in_width + 2 * pad_w - kernel_width) / stride_w + 1;
  }
  bool valid() const noexcept {
    return kernel_height >= 1 && kernel_width >= 1 && stride_h >= 1 && stride_w >= 1 &&
           in_height + 2 * pad_h >= kernel_height && in_width + 2 * pad_w >= kernel_width;
  }
};

/// Cross-correlation (no kernel flip) with zero padding, plus bias.
/// kernels: out_c x in_c x kh x kw, input: in_c x H x W, out: out_c x H' x W'.
void conv2d_linear_serial(const ConvGeometry& g, std::span<const double> kernels,
                          std::span<const double> bias, std::span<const double> input,
                          std::span<double> out);
void conv2d_linear_parallel(const ConvGeometry& g, std::span<const double> kernels,
                            std::span<const double> bias, std::span<const double> input,
                            std::span<double> out);

/// act(j, q) = phi(p_j . x_q + offset_j) for points (n x d) and queries (Q x d).
/// An empty offsets span means zero offsets.
Matrix activation_matrix_serial(const Matrix& points, std::span<const double> offsets,
                                const Matrix& queries, const Activation& phi);
Matrix activation_matrix_parallel(const Matrix& points, std::span<const double> offsets,
                                  const Matrix& queries, const Activation& phi);

/// out(q, i) = sum_s weights(i, s) * act(rows[s], q). weights is k x |rows|.
Matrix combine_serial(const Matrix& act, std::span<const std::size_t> rows,
                      const Matrix& weights);
Matrix combine_parallel(const Matrix& act, std::span<const std::size_t> rows,
                        const Matrix& weights);

// Dispatching front ends.
void dense_linear(Exec e, const Matrix& weights, std::span<const double> bias,
                  std::span<const double> x, std::span<double> y);
void conv2d_linear(Exec e, const ConvGeometry& g, std::span<const double> kernels,
                   std::span<const double> bias, std::span<const double> input,
                   std::span<double> out);
Matrix activation_matrix(Exec e, const Matrix& points, std::span<const double> offsets,
                         const Matrix& queries, const Activation& phi);
Matrix combine(Exec e, const Matrix& act, std::span<const std::size_t> rows,
               const Matrix& weights);

}  // namespace sensprune::kernels
