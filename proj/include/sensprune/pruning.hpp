#pragma once

// Structured pruning of adjacent layer pairs. For a dense pair (i, i+1) the
// points are the rows of W_i and the weight functions are the rows of
// W_{i+1}; for a conv pair (l, l+1) the points are the flattened filters of
// layer l and there is one weight function per (out-channel, spatial offset)
// of layer l+1. One coreset support is shared by all weight functions.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "sensprune/baselines.hpp"
#include "sensprune/coreset.hpp"
#include "sensprune/network.hpp"

namespace sensprune {

struct PruneSpec {
  /// Target width per prunable layer, in input-to-output order.
  std::vector<std::size_t> budgets;
  Method method = Method::coreset;
  /// Query radius per prunable layer. Falls back to the model's beta, then to
  /// propagate_beta from input_radius.
  std::optional<std::vector<double>> beta;
  double input_radius = 1.0;
  double delta = 0.1;
  double c = 1.0;
  std::uint64_t seed = 0;
  /// Redraw (up to 64 times) until the support has min(m, n_effective) units.
  bool exact_width = false;
};

struct LayerPruneEntry {
  std::size_t layer = 0;
  std::size_t original_width = 0;
  std::size_t new_width = 0;
  std::size_t budget = 0;
  std::size_t support_size = 0;
  std::size_t dimension = 0;
  double beta = 0.0;
  double total_sensitivity = 0.0;
  /// Only meaningful for Method::coreset.
  std::optional<double> certified_epsilon;
  std::uint64_t seed = 0;
  std::size_t attempts = 1;
};

struct PruneReport {
  Method method = Method::coreset;
  std::uint64_t seed = 0;
  double delta = 0.1;
  double c = 1.0;
  std::vector<LayerPruneEntry> layers;
};

nlohmann::json report_to_json(const PruneReport& report);

struct LayerPruneOptions {
  std::size_t budget = 1;
  Method method = Method::coreset;
  double beta = 1.0;
  double delta = 0.1;
  double c = 1.0;
  std::uint64_t seed = 0;
  bool exact_width = false;
};

struct LayerPruneResult {
  Network network;
  LayerPruneEntry entry;
  Coreset coreset;
};

/// Throws LayerTypeMismatch unless layers i and i+1 are dense.
WeightedSet dense_layer_to_weighted_set(const Network& net, std::size_t i);
/// Throws LayerTypeMismatch unless layers l and l+1 are conv.
WeightedSet conv_layer_to_weighted_set(const Network& net, std::size_t l);

LayerPruneResult prune_dense(const Network& net, std::size_t i, const LayerPruneOptions& opts);
/// Stride-1, valid-padding conv pairs only (Unsupported otherwise).
LayerPruneResult prune_conv(const Network& net, std::size_t l, const LayerPruneOptions& opts);

/// Prunes every prunable layer bottom to top, each on the already pruned
/// predecessor. Errors are rethrown with the layer index prepended.
std::pair<Network, PruneReport> prune_network(const Network& net, const PruneSpec& spec);

/// Norm bound on the input of every layer (layers.size() + 1 entries, the
/// last one bounding the output): beta_0 = beta_input and
///   beta_{i+1} = sqrt(n_i) * sup |phi_i| on [-(alpha_i beta_i + max|b_i|), alpha_i beta_i + max|b_i|]
/// where n_i counts the layer's output elements and alpha_i is its largest
/// row (or flattened filter) norm. Flatten layers pass the bound through.
std::vector<double> propagate_beta(const Network& net, double beta_input);

}  // namespace sensprune
