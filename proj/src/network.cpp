#include "sensprune/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensprune/error.hpp"

namespace sensprune {

namespace {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Shape output_shape(const Layer& layer, const Shape& in, std::size_t index) {
  const auto where = "layer " + std::to_string(index) + ": ";
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    if (in.size() != 1 || in[0] != d->in_units()) {
      throw Error(ErrorCode::ShapeMismatch, where + "dense layer expects input [" +
                                                std::to_string(d->in_units()) + "], got " +
                                                shape_str(in));
    }
    return {d->out_units()};
  }
  if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    if (c->kernels.shape.size() != 4) {
      throw Error(ErrorCode::ShapeMismatch, where + "conv kernels must be 4-D");
    }
    if (in.size() != 3 || in[0] != c->in_channels()) {
      throw Error(ErrorCode::ShapeMismatch, where + "conv layer expects " +
                                                std::to_string(c->in_channels()) +
                                                " input channels, got " + shape_str(in));
    }
    const auto g = c->geometry(in[1], in[2]);
    if (!g.valid()) {
      throw Error(ErrorCode::ShapeMismatch,
                  where + "kernel does not fit input " + shape_str(in));
    }
    return {c->out_channels(), g.out_height(), g.out_width()};
  }
  return {Tensor::element_count(in)};
}

}  // namespace

kernels::ConvGeometry ConvLayer::geometry(std::size_t in_h, std::size_t in_w) const {
  kernels::ConvGeometry g;
  g.in_channels = in_channels();
  g.in_height = in_h;
  g.in_width = in_w;
  g.out_channels = out_channels();
  g.kernel_height = kernel_height();
  g.kernel_width = kernel_width();
  g.stride_h = stride_h;
  g.stride_w = stride_w;
  g.pad_h = pad_h;
  g.pad_w = pad_w;
  return g;
}

std::vector<Shape> layer_shapes(const Network& net) {
  std::vector<Shape> shapes{net.input_shape};
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    shapes.push_back(output_shape(net.layers[i], shapes.back(), i));
  }
  return shapes;
}

void validate(const Network& net) {
  if (net.input_shape.empty() ||
      std::any_of(net.input_shape.begin(), net.input_shape.end(),
                  [](std::size_t s) { return s == 0; })) {
    throw Error(ErrorCode::ShapeMismatch, "network: input_shape must be non-empty and positive");
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto where = "layer " + std::to_string(i) + ": ";
    if (const auto* d = std::get_if<DenseLayer>(&net.layers[i])) {
      if (d->out_units() == 0 || d->in_units() == 0) {
        throw Error(ErrorCode::ShapeMismatch, where + "empty dense weight matrix");
      }
      if (d->bias.size() != d->out_units()) {
        throw Error(ErrorCode::ShapeMismatch, where + "bias length differs from out_units");
      }
      if (!finite(d->weights.data()) || !finite(d->bias)) {
        throw Error(ErrorCode::InvalidParameter, where + "non-finite weight");
      }
    } else if (const auto* c = std::get_if<ConvLayer>(&net.layers[i])) {
      if (c->kernels.shape.size() != 4 || c->kernels.size() == 0 ||
          c->kernels.data.size() != Tensor::element_count(c->kernels.shape)) {
        throw Error(ErrorCode::ShapeMismatch, where + "conv kernels must be a non-empty 4-D array");
      }
      if (c->bias.size() != c->out_channels()) {
        throw Error(ErrorCode::ShapeMismatch, where + "bias length differs from out_channels");
      }
      if (c->stride_h == 0 || c->stride_w == 0) {
        throw Error(ErrorCode::InvalidParameter, where + "stride must be positive");
      }
      if (!finite(c->kernels.data) || !finite(c->bias)) {
        throw Error(ErrorCode::InvalidParameter, where + "non-finite weight");
      }
    }
  }
  layer_shapes(net);
  if (net.beta) {
    const auto prunable = prunable_layers(net);
    if (net.beta->size() != prunable.size()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "network: beta has " + std::to_string(net.beta->size()) + " entries for " +
                      std::to_string(prunable.size()) + " prunable layers");
    }
    for (const double b : *net.beta) {
      if (!std::isfinite(b) || !(b > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "network: beta entries must be positive");
      }
    }
  }
}

std::vector<std::size_t> prunable_layers(const Network& net) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
    const bool dense_pair = std::holds_alternative<DenseLayer>(net.layers[i]) &&
                            std::holds_alternative<DenseLayer>(net.layers[i + 1]);
    const bool conv_pair = std::holds_alternative<ConvLayer>(net.layers[i]) &&
                           std::holds_alternative<ConvLayer>(net.layers[i + 1]);
    if (dense_pair || conv_pair) out.push_back(i);
  }
  return out;
}

std::size_t layer_width(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->out_units();
  if (const auto* c = std::get_if<ConvLayer>(&layer)) return c->out_channels();
  return 0;
}

namespace {

Tensor linear_part(const Layer& layer, const Tensor& in, kernels::Exec exec) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    Tensor out({d->out_units()});
    kernels::dense_linear(exec, d->weights, d->bias, in.data, out.data);
    return out;
  }
  const auto& c = std::get<ConvLayer>(layer);
  const auto g = c.geometry(in.shape[1], in.shape[2]);
  Tensor out({g.out_channels, g.out_height(), g.out_width()});
  kernels::conv2d_linear(exec, g, c.kernels.data, c.bias, in.data, out.data);
  return out;
}

const Activation* activation_of(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) return &d->activation;
  if (const auto* c = std::get_if<ConvLayer>(&layer)) return &c->activation;
  return nullptr;
}

Tensor apply_layer(const Layer& layer, Tensor in, kernels::Exec exec) {
  if (std::holds_alternative<FlattenLayer>(layer)) {
    in.shape = {in.data.size()};
    return in;
  }
  Tensor out = linear_part(layer, in, exec);
  const Activation& phi = *activation_of(layer);
  for (auto& v : out.data) v = phi.eval(v);
  return out;
}

void check_input(const Network& net, const Tensor& x) {
  if (x.shape != net.input_shape) {
    throw Error(ErrorCode::ShapeMismatch, "input shape " + shape_str(x.shape) +
                                              " does not match network input " +
                                              shape_str(net.input_shape));
  }
  if (x.data.size() != Tensor::element_count(x.shape)) {
    throw Error(ErrorCode::ShapeMismatch, "input data size does not match its shape");
  }
}

}  // namespace

Tensor forward_prefix(const Network& net, std::size_t layer_count, const Tensor& x,
                      kernels::Exec exec) {
  if (layer_count > net.layers.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "forward_prefix: layer count out of range");
  }
  check_input(net, x);
  layer_shapes(net);
  Tensor cur = x;
  for (std::size_t i = 0; i < layer_count; ++i) cur = apply_layer(net.layers[i], std::move(cur), exec);
  return cur;
}

Tensor forward(const Network& net, const Tensor& x, kernels::Exec exec) {
  return forward_prefix(net, net.layers.size(), x, exec);
}

Tensor forward_linear_part(const Network& net, std::size_t layer_idx, const Tensor& x,
                           kernels::Exec exec) {
  if (layer_idx >= net.layers.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "forward_linear_part: layer " + std::to_string(layer_idx) + " out of range");
  }
  if (std::holds_alternative<FlattenLayer>(net.layers[layer_idx])) {
    throw Error(ErrorCode::IndexOutOfRange,
                "forward_linear_part: layer " + std::to_string(layer_idx) +
                    " is a flatten layer and has no linear part");
  }
  const Tensor in = forward_prefix(net, layer_idx, x, exec);
  return linear_part(net.layers[layer_idx], in, exec);
}

}  // namespace sensprune
