#include "sensprune/model_io.hpp"

#include <fstream>
#include <sstream>

#include "sensprune/error.hpp"

namespace sensprune {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

const json& require(const json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) parse_fail(field + "." + key, "missing");
  return obj.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) parse_fail(field, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    parse_fail(field, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::vector<double> vector_of(const json& j, const std::string& field) {
  if (!j.is_array()) parse_fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Flattens a rectangular nested array of the given rank, recording its shape.
void flatten_nested(const json& j, std::size_t depth, std::size_t rank, Shape& shape,
                    std::vector<double>& out, const std::string& field) {
  if (depth == rank) {
    out.push_back(number(j, field));
    return;
  }
  if (!j.is_array()) parse_fail(field, "expected a nested array of rank " + std::to_string(rank));
  if (shape.size() == depth) {
    shape.push_back(j.size());
  } else if (shape[depth] != j.size()) {
    parse_fail(field, "ragged array: expected " + std::to_string(shape[depth]) + " entries, got " +
                          std::to_string(j.size()));
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    flatten_nested(j[i], depth + 1, rank, shape, out, field + "[" + std::to_string(i) + "]");
  }
}

json nest(std::span<const double> data, std::span<const std::size_t> shape) {
  if (shape.size() == 1) return json(std::vector<double>(data.begin(), data.end()));
  json arr = json::array();
  const std::size_t stride = data.size() / shape[0];
  for (std::size_t i = 0; i < shape[0]; ++i) {
    arr.push_back(nest(data.subspan(i * stride, stride), shape.subspan(1)));
  }
  return arr;
}

std::pair<std::size_t, std::size_t> pair_of(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) parse_fail(field, "expected a pair [h, w]");
  return {count(j[0], field + "[0]"), count(j[1], field + "[1]")};
}

Layer layer_from_json(const json& jl, const std::string& field) {
  if (!jl.is_object()) parse_fail(field, "expected an object");
  const json& type = require(jl, "type", field);
  if (!type.is_string()) parse_fail(field + ".type", "expected a string");
  const auto t = type.get<std::string>();
  if (t == "flatten") return FlattenLayer{};
  if (t != "dense" && t != "conv2d") {
    parse_fail(field + ".type", "unknown layer type '" + t + "'");
  }
  const Activation phi = activation_from_json(require(jl, "activation", field), field + ".activation");
  const auto bias = vector_of(require(jl, "bias", field), field + ".bias");
  Shape shape;
  std::vector<double> data;
  const std::size_t rank = t == "dense" ? 2 : 4;
  flatten_nested(require(jl, "weights", field), 0, rank, shape, data, field + ".weights");
  if (shape.size() != rank) parse_fail(field + ".weights", "empty weight array");

  if (t == "dense") {
    DenseLayer d;
    d.weights = Matrix(shape[0], shape[1], std::move(data));
    d.bias = bias;
    d.activation = phi;
    return d;
  }
  ConvLayer c;
  c.kernels = Tensor(shape, std::move(data));
  c.bias = bias;
  c.activation = phi;
  if (jl.contains("stride")) {
    std::tie(c.stride_h, c.stride_w) = pair_of(jl.at("stride"), field + ".stride");
  }
  if (jl.contains("padding")) {
    const json& p = jl.at("padding");
    if (p.is_string()) {
      if (p.get<std::string>() != "valid") {
        parse_fail(field + ".padding", "expected \"valid\" or [ph, pw]");
      }
    } else {
      std::tie(c.pad_h, c.pad_w) = pair_of(p, field + ".padding");
    }
  }
  return c;
}

json layer_to_json(const Layer& layer) {
  json jl;
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    jl["type"] = "dense";
    const std::size_t shape[] = {d->weights.rows(), d->weights.cols()};
    jl["weights"] = nest(d->weights.data(), shape);
    jl["bias"] = d->bias;
    jl["activation"] = activation_to_json(d->activation);
  } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    jl["type"] = "conv2d";
    jl["weights"] = nest(c->kernels.data, c->kernels.shape);
    jl["bias"] = c->bias;
    jl["activation"] = activation_to_json(c->activation);
    jl["stride"] = {c->stride_h, c->stride_w};
    if (c->pad_h == 0 && c->pad_w == 0) {
      jl["padding"] = "valid";
    } else {
      jl["padding"] = {c->pad_h, c->pad_w};
    }
  } else {
    jl["type"] = "flatten";
  }
  return jl;
}

}  // namespace

json activation_to_json(const Activation& phi) {
  json j;
  j["kind"] = std::string(phi.name());
  if (phi.variant() == ActivationVariant::soft_clip) j["alpha"] = phi.alpha();
  return j;
}

Activation activation_from_json(const json& j, const std::string& field) {
  std::string name;
  const json* alpha = nullptr;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (j.is_object()) {
    const json& kind = require(j, "kind", field);
    if (!kind.is_string()) parse_fail(field + ".kind", "expected a string");
    name = kind.get<std::string>();
    if (j.contains("alpha")) alpha = &j.at("alpha");
  } else {
    parse_fail(field, "expected {\"kind\": ...} or a name");
  }
  const auto v = parse_activation_variant(name);
  if (!v) parse_fail(field + ".kind", "unknown activation '" + name + "'");
  if (*v == ActivationVariant::soft_clip) {
    if (!alpha) parse_fail(field + ".alpha", "soft_clip requires alpha");
    const double a = number(*alpha, field + ".alpha");
    if (!(a > 0.0)) parse_fail(field + ".alpha", "soft_clip alpha must be positive");
    return Activation::soft_clip(a);
  }
  return Activation::from_variant(*v);
}

json model_to_json(const Network& net) {
  json j;
  j["input_shape"] = net.input_shape;
  j["layers"] = json::array();
  for (const auto& layer : net.layers) j["layers"].push_back(layer_to_json(layer));
  if (net.beta) j["beta"] = *net.beta;
  return j;
}

Network model_from_json(const json& j) {
  if (!j.is_object()) parse_fail("<root>", "expected an object");
  Network net;
  const json& shape = require(j, "input_shape", "<root>");
  if (!shape.is_array() || shape.empty()) parse_fail("input_shape", "expected a non-empty array");
  for (std::size_t i = 0; i < shape.size(); ++i) {
    net.input_shape.push_back(count(shape[i], "input_shape[" + std::to_string(i) + "]"));
  }
  const json& layers = require(j, "layers", "<root>");
  if (!layers.is_array()) parse_fail("layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    net.layers.push_back(layer_from_json(layers[i], "layers[" + std::to_string(i) + "]"));
  }
  if (j.contains("beta") && !j.at("beta").is_null()) {
    net.beta = vector_of(j.at("beta"), "beta");
  }
  validate(net);
  return net;
}

Network parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
  }
  return model_from_json(j);
}

std::string serialize_model(const Network& net) { return model_to_json(net).dump() + "\n"; }

Network load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

void save_model(const Network& net, const std::filesystem::path& path) {
  validate(net);
  write_text_file(path, serialize_model(net));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace sensprune
