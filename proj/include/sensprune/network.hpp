#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "sensprune/activation.hpp"
#include "sensprune/kernels.hpp"
#include "sensprune/matrix.hpp"

namespace sensprune {

/// y = phi(W x + b). Row j of `weights` is the incoming weight vector of unit j.
struct DenseLayer {
  Matrix weights;  // out_units x in_units
  std::vector<double> bias;
  Activation activation;

  std::size_t in_units() const noexcept { return weights.cols(); }
  std::size_t out_units() const noexcept { return weights.rows(); }
};

/// Cross-correlation (no flip), zero padding, then bias and phi.
struct ConvLayer {
  Tensor kernels;  // out_channels x in_channels x kh x kw
  std::vector<double> bias;
  Activation activation;
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;

  std::size_t out_channels() const noexcept { return kernels.shape.at(0); }
  std::size_t in_channels() const noexcept { return kernels.shape.at(1); }
  std::size_t kernel_height() const noexcept { return kernels.shape.at(2); }
  std::size_t kernel_width() const noexcept { return kernels.shape.at(3); }
  std::size_t kernel_size() const noexcept {
    return in_channels() * kernel_height() * kernel_width();
  }
  bool unit_stride_valid() const noexcept {
    return stride_h == 1 && stride_w == 1 && pad_h == 0 && pad_w == 0;
  }
  kernels::ConvGeometry geometry(std::size_t in_h, std::size_t in_w) const;
};

/// Row-major reshape to a vector.
struct FlattenLayer {};

using Layer = std::variant<DenseLayer, ConvLayer, FlattenLayer>;

using Shape = std::vector<std::size_t>;

struct Network {
  Shape input_shape;
  std::vector<Layer> layers;
  /// Query-ball radius per prunable layer, if the model file provides one.
  std::optional<std::vector<double>> beta;
};

/// Shape of the input to each layer plus the final output shape
/// (layers.size() + 1 entries). Throws ShapeMismatch on an inconsistent chain.
std::vector<Shape> layer_shapes(const Network& net);

/// Checks finiteness, shape consistency and the beta list. Throws ShapeMismatch
/// or InvalidParameter.
void validate(const Network& net);

/// Indices i such that layers i and i+1 are both dense or both conv.
std::vector<std::size_t> prunable_layers(const Network& net);

/// Width of a dense layer or channel count of a conv layer; 0 for flatten.
std::size_t layer_width(const Layer& layer);

Tensor forward(const Network& net, const Tensor& x,
               kernels::Exec exec = kernels::Exec::parallel);

/// Runs layers [0, layer_idx) fully and stops layer `layer_idx` before phi.
/// Flatten layers have no linear part (IndexOutOfRange as well as bad indices).
Tensor forward_linear_part(const Network& net, std::size_t layer_idx, const Tensor& x,
                           kernels::Exec exec = kernels::Exec::parallel);

/// Applies the first `layer_count` layers; `forward_prefix(net, 0, x)` is x.
Tensor forward_prefix(const Network& net, std::size_t layer_count, const Tensor& x,
                      kernels::Exec exec = kernels::Exec::parallel);

}  // namespace sensprune
