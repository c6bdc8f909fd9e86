#pragma once

// .nnj model files: JSON with row-major nested weight arrays.
//
//   {"input_shape": [...],
//    "layers": [{"type": "dense", "weights": [[...]], "bias": [...],
//                "activation": {"kind": "relu"}},
//               {"type": "conv2d", "weights": [[[[...]]]], "bias": [...],
//                "activation": {"kind": "soft_clip", "alpha": 2.0},
//                "stride": [1, 1], "padding": "valid" | [ph, pw]},
//               {"type": "flatten"}],
//    "beta": [...]}            // optional, one entry per prunable layer
//
// conv2d is cross-correlation (no kernel flip). Doubles are written in
// shortest round-trip form, so save/load is bit-exact.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sensprune/network.hpp"

namespace sensprune {

nlohmann::json activation_to_json(const Activation& phi);
/// Accepts {"kind": name[, "alpha": a]} or a bare name string. `field` names
/// the location for error messages.
Activation activation_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json model_to_json(const Network& net);
/// Throws ParseError naming the offending field, ShapeMismatch on an
/// inconsistent network.
Network model_from_json(const nlohmann::json& j);

/// Parses model text; syntax errors carry line and column.
Network parse_model(std::string_view text);
std::string serialize_model(const Network& net);

Network load_model(const std::filesystem::path& path);
void save_model(const Network& net, const std::filesystem::path& path);

/// Reads a whole file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);
/// Writes a whole file; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sensprune
