#include "sensprune/kernels.hpp"

#include <cstdint>

namespace sensprune::kernels {

namespace {

// Per-output-element bodies shared by the serial and parallel loops.

inline double dense_row(const Matrix& w, std::span<const double> bias,
                        std::span<const double> x, std::size_t o) {
  const auto row = w.row(o);
  double acc = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * x[i];
  return acc + (bias.empty() ? 0.0 : bias[o]);
}

inline double conv_point(const ConvGeometry& g, std::span<const double> kernels,
                         std::span<const double> bias, std::span<const double> input,
                         std::size_t oc, std::size_t oy, std::size_t ox) {
  const std::size_t ksize = g.kernel_height * g.kernel_width;
  double acc = 0.0;
  for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
    const double* k = kernels.data() + (oc * g.in_channels + ic) * ksize;
    const double* in = input.data() + ic * g.in_height * g.in_width;
    for (std::size_t ky = 0; ky < g.kernel_height; ++ky) {
      const auto iy = static_cast<std::int64_t>(oy * g.stride_h + ky) -
                      static_cast<std::int64_t>(g.pad_h);
      if (iy < 0 || iy >= static_cast<std::int64_t>(g.in_height)) continue;
      for (std::size_t kx = 0; kx < g.kernel_width; ++kx) {
        const auto ix = static_cast<std::int64_t>(ox * g.stride_w + kx) -
                        static_cast<std::int64_t>(g.pad_w);
        if (ix < 0 || ix >= static_cast<std::int64_t>(g.in_width)) continue;
        acc += k[ky * g.kernel_width + kx] *
               in[static_cast<std::size_t>(iy) * g.in_width + static_cast<std::size_t>(ix)];
      }
    }
  }
  return acc + (bias.empty() ? 0.0 : bias[oc]);
}

inline void activation_column(const Matrix& points, std::span<const double> offsets,
                              const Matrix& queries, const Activation& phi, std::size_t q,
                              Matrix& out) {
  const auto x = queries.row(q);
  for (std::size_t j = 0; j < points.rows(); ++j) {
    const auto p = points.row(j);
    double z = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) z += p[t] * x[t];
    if (!offsets.empty()) z += offsets[j];
    out(j, q) = phi.eval(z);
  }
}

inline void combine_row(const Matrix& act, std::span<const std::size_t> rows,
                        const Matrix& weights, std::size_t q, Matrix& out) {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const auto w = weights.row(i);
    double acc = 0.0;
    for (std::size_t s = 0; s < rows.size(); ++s) acc += w[s] * act(rows[s], q);
    out(q, i) = acc;
  }
}

}  // namespace

void dense_linear_serial(const Matrix& weights, std::span<const double> bias,
                         std::span<const double> x, std::span<double> y) {
  for (std::size_t o = 0; o < weights.rows(); ++o) y[o] = dense_row(weights, bias, x, o);
}

void dense_linear_parallel(const Matrix& weights, std::span<const double> bias,
                           std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(weights.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < n; ++o) {
    y[static_cast<std::size_t>(o)] = dense_row(weights, bias, x, static_cast<std::size_t>(o));
  }
}

void conv2d_linear_serial(const ConvGeometry& g, std::span<const double> kernels,
                          std::span<const double> bias, std::span<const double> input,
                          std::span<double> out) {
  const std::size_t oh = g.out_height(), ow = g.out_width();
  for (std::size_t oc = 0; oc < g.out_channels; ++oc)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox)
        out[(oc * oh + oy) * ow + ox] = conv_point(g, kernels, bias, input, oc, oy, ox);
}

void conv2d_linear_parallel(const ConvGeometry& g, std::span<const double> kernels,
                            std::span<const double> bias, std::span<const double> input,
                            std::span<double> out) {
  const std::size_t oh = g.out_height(), ow = g.out_width();
  const auto planes = static_cast<std::int64_t>(g.out_channels * oh);
#pragma omp parallel for schedule(static)
  for (std::int64_t plane = 0; plane < planes; ++plane) {
    const std::size_t oc = static_cast<std::size_t>(plane) / oh;
    const std::size_t oy = static_cast<std::size_t>(plane) % oh;
    for (std::size_t ox = 0; ox < ow; ++ox)
      out[(oc * oh + oy) * ow + ox] = conv_point(g, kernels, bias, input, oc, oy, ox);
  }
}

Matrix activation_matrix_serial(const Matrix& points, std::span<const double> offsets,
                                const Matrix& queries, const Activation& phi) {
  Matrix out(points.rows(), queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q)
    activation_column(points, offsets, queries, phi, q, out);
  return out;
}

Matrix activation_matrix_parallel(const Matrix& points, std::span<const double> offsets,
                                  const Matrix& queries, const Activation& phi) {
  Matrix out(points.rows(), queries.rows());
  const auto nq = static_cast<std::int64_t>(queries.rows());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t q = 0; q < nq; ++q)
    activation_column(points, offsets, queries, phi, static_cast<std::size_t>(q), out);
  return out;
}

Matrix combine_serial(const Matrix& act, std::span<const std::size_t> rows,
                      const Matrix& weights) {
  Matrix out(act.cols(), weights.rows());
  for (std::size_t q = 0; q < act.cols(); ++q) combine_row(act, rows, weights, q, out);
  return out;
}

Matrix combine_parallel(const Matrix& act, std::span<const std::size_t> rows,
                        const Matrix& weights) {
  Matrix out(act.cols(), weights.rows());
  const auto nq = static_cast<std::int64_t>(act.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < nq; ++q)
    combine_row(act, rows, weights, static_cast<std::size_t>(q), out);
  return out;
}

void dense_linear(Exec e, const Matrix& weights, std::span<const double> bias,
                  std::span<const double> x, std::span<double> y) {
  if (e == Exec::parallel) {
    dense_linear_parallel(weights, bias, x, y);
  } else {
    dense_linear_serial(weights, bias, x, y);
  }
}

void conv2d_linear(Exec e, const ConvGeometry& g, std::span<const double> kernels,
                   std::span<const double> bias, std::span<const double> input,
                   std::span<double> out) {
  if (e == Exec::parallel) {
    conv2d_linear_parallel(g, kernels, bias, input, out);
  } else {
    conv2d_linear_serial(g, kernels, bias, input, out);
  }
}

Matrix activation_matrix(Exec e, const Matrix& points, std::span<const double> offsets,
                         const Matrix& queries, const Activation& phi) {
  return e == Exec::parallel ? activation_matrix_parallel(points, offsets, queries, phi)
                             : activation_matrix_serial(points, offsets, queries, phi);
}

Matrix combine(Exec e, const Matrix& act, std::span<const std::size_t> rows,
               const Matrix& weights) {
  return e == Exec::parallel ? combine_parallel(act, rows, weights)
                             : combine_serial(act, rows, weights);
}

}  // namespace sensprune::kernels
