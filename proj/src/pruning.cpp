#include "sensprune/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensprune/error.hpp"
#include "sensprune/rng.hpp"

namespace sensprune {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxWidthAttempts = 64;

const DenseLayer& dense_at(const Network& net, std::size_t i, const char* who) {
  if (i >= net.layers.size() || !std::holds_alternative<DenseLayer>(net.layers[i])) {
    throw Error(ErrorCode::LayerTypeMismatch,
                std::string(who) + ": layer " + std::to_string(i) + " is not dense");
  }
  return std::get<DenseLayer>(net.layers[i]);
}

const ConvLayer& conv_at(const Network& net, std::size_t i, const char* who) {
  if (i >= net.layers.size() || !std::holds_alternative<ConvLayer>(net.layers[i])) {
    throw Error(ErrorCode::LayerTypeMismatch,
                std::string(who) + ": layer " + std::to_string(i) + " is not conv2d");
  }
  return std::get<ConvLayer>(net.layers[i]);
}

// Samples the shared support, redrawing for exact widths if requested.
std::pair<Coreset, std::size_t> select_support(const WeightedSet& ws, const LayerPruneOptions& opts,
                                               const Activation& phi, const QueryBall& ball) {
  const std::size_t width = ws.n();
  if (opts.budget == 0) {
    throw Error(ErrorCode::InvalidParameter, "budget must be >= 1");
  }
  if (opts.budget > width) {
    throw Error(ErrorCode::BudgetExceedsWidth, "budget " + std::to_string(opts.budget) +
                                                   " exceeds layer width " +
                                                   std::to_string(width));
  }
  Coreset best = build_coreset(opts.method, ws, opts.budget, phi, ball, opts.seed);
  if (!opts.exact_width || opts.method == Method::percentile) return {std::move(best), 1};

  const auto& pr = best.plan.probabilities;
  const auto effective =
      static_cast<std::size_t>(std::count_if(pr.begin(), pr.end(), [](double p) { return p > 0.0; }));
  const std::size_t target = std::min(opts.budget, effective);
  std::size_t attempts = 1;
  while (best.support_size() < target && attempts < kMaxWidthAttempts) {
    const auto seed = substream_seed(opts.seed, attempts);
    ++attempts;
    Coreset next = build_coreset(opts.method, ws, opts.budget, phi, ball, seed);
    if (next.support_size() > best.support_size()) best = std::move(next);
  }
  return {std::move(best), attempts};
}

LayerPruneEntry make_entry(std::size_t layer, const WeightedSet& ws, const Coreset& c,
                           const SamplingPlan& sens, const LayerPruneOptions& opts,
                           std::size_t attempts) {
  LayerPruneEntry e;
  e.layer = layer;
  e.original_width = ws.n();
  e.new_width = c.support_size();
  e.budget = opts.budget;
  e.support_size = c.support_size();
  e.dimension = ws.d();
  e.beta = opts.beta;
  e.total_sensitivity = sens.total_sensitivity;
  if (opts.method == Method::coreset) {
    e.certified_epsilon = certified_epsilon(opts.budget, sens.total_sensitivity, ws.d(),
                                            opts.delta, opts.c);
  }
  e.seed = c.seed;
  e.attempts = attempts;
  return e;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

json report_to_json(const PruneReport& report) {
  json j;
  j["method"] = std::string(to_string(report.method));
  j["seed"] = report.seed;
  j["delta"] = report.delta;
  j["c"] = report.c;
  j["layers"] = json::array();
  for (const auto& e : report.layers) {
    json je;
    je["layer"] = e.layer;
    je["original_width"] = e.original_width;
    je["new_width"] = e.new_width;
    je["budget"] = e.budget;
    je["support_size"] = e.support_size;
    je["dimension"] = e.dimension;
    je["beta"] = e.beta;
    je["total_sensitivity"] = e.total_sensitivity;
    je["certified_epsilon"] = e.certified_epsilon ? json(*e.certified_epsilon) : json(nullptr);
    je["seed"] = e.seed;
    je["attempts"] = e.attempts;
    j["layers"].push_back(std::move(je));
  }
  return j;
}

WeightedSet dense_layer_to_weighted_set(const Network& net, std::size_t i) {
  const auto& layer = dense_at(net, i, "dense_layer_to_weighted_set");
  const auto& next = dense_at(net, i + 1, "dense_layer_to_weighted_set");
  if (next.in_units() != layer.out_units()) {
    throw Error(ErrorCode::ShapeMismatch, "dense_layer_to_weighted_set: layer " +
                                              std::to_string(i + 1) +
                                              " does not consume layer " + std::to_string(i));
  }
  return WeightedSet(layer.weights, next.weights, layer.bias);
}

WeightedSet conv_layer_to_weighted_set(const Network& net, std::size_t l) {
  const auto& layer = conv_at(net, l, "conv_layer_to_weighted_set");
  const auto& next = conv_at(net, l + 1, "conv_layer_to_weighted_set");
  const std::size_t n = layer.out_channels();
  if (next.in_channels() != n) {
    throw Error(ErrorCode::ShapeMismatch, "conv_layer_to_weighted_set: channel mismatch");
  }
  Matrix points(n, layer.kernel_size(), layer.kernels.data);
  const std::size_t q = next.out_channels();
  const std::size_t offsets = next.kernel_height() * next.kernel_width();
  // Weight function (i, j) = row i * offsets + j; entry k is
  // kernels_{l+1}[i, k, j / kw, j % kw].
  Matrix weights(q * offsets, n);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < offsets; ++j)
        weights(i * offsets + j, k) = next.kernels.data[(i * n + k) * offsets + j];
  return WeightedSet(std::move(points), std::move(weights), layer.bias);
}

LayerPruneResult prune_dense(const Network& net, std::size_t i, const LayerPruneOptions& opts) {
  const WeightedSet ws = dense_layer_to_weighted_set(net, i);
  const auto& layer = std::get<DenseLayer>(net.layers[i]);
  const QueryBall ball(opts.beta, ws.d());
  const SamplingPlan sens = sampling_plan(ws, layer.activation, ball);
  auto [coreset, attempts] = select_support(ws, opts, layer.activation, ball);

  const std::size_t s = coreset.support_size();
  DenseLayer pruned = layer;
  pruned.weights = Matrix(s, layer.in_units());
  pruned.bias.assign(s, 0.0);
  for (std::size_t r = 0; r < s; ++r) {
    const auto src = layer.weights.row(coreset.indices[r]);
    std::copy(src.begin(), src.end(), pruned.weights.row(r).begin());
    pruned.bias[r] = layer.bias[coreset.indices[r]];
  }
  DenseLayer consumer = std::get<DenseLayer>(net.layers[i + 1]);
  consumer.weights = coreset.new_weights;

  LayerPruneResult out{net, make_entry(i, ws, coreset, sens, opts, attempts), std::move(coreset)};
  out.network.layers[i] = std::move(pruned);
  out.network.layers[i + 1] = std::move(consumer);
  return out;
}

LayerPruneResult prune_conv(const Network& net, std::size_t l, const LayerPruneOptions& opts) {
  const WeightedSet ws = conv_layer_to_weighted_set(net, l);
  const auto& layer = std::get<ConvLayer>(net.layers[l]);
  const auto& next = std::get<ConvLayer>(net.layers[l + 1]);
  if (!layer.unit_stride_valid() || !next.unit_stride_valid()) {
    throw Error(ErrorCode::Unsupported, "prune_conv: layers " + std::to_string(l) + " and " +
                                            std::to_string(l + 1) +
                                            " must both use stride 1 and valid padding");
  }
  const QueryBall ball(opts.beta, ws.d());
  const SamplingPlan sens = sampling_plan(ws, layer.activation, ball);
  auto [coreset, attempts] = select_support(ws, opts, layer.activation, ball);

  const std::size_t s = coreset.support_size();
  const std::size_t ksize = layer.kernel_size();
  ConvLayer pruned = layer;
  pruned.kernels = Tensor({s, layer.in_channels(), layer.kernel_height(), layer.kernel_width()});
  pruned.bias.assign(s, 0.0);
  for (std::size_t r = 0; r < s; ++r) {
    const std::size_t src = coreset.indices[r];
    std::copy_n(layer.kernels.data.begin() + static_cast<std::ptrdiff_t>(src * ksize), ksize,
                pruned.kernels.data.begin() + static_cast<std::ptrdiff_t>(r * ksize));
    pruned.bias[r] = layer.bias[src];
  }

  const std::size_t q = next.out_channels();
  const std::size_t offsets = next.kernel_height() * next.kernel_width();
  ConvLayer consumer = next;
  consumer.kernels = Tensor({q, s, next.kernel_height(), next.kernel_width()});
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t r = 0; r < s; ++r)
      for (std::size_t j = 0; j < offsets; ++j)
        consumer.kernels.data[(i * s + r) * offsets + j] = coreset.new_weights(i * offsets + j, r);

  LayerPruneResult out{net, make_entry(l, ws, coreset, sens, opts, attempts), std::move(coreset)};
  out.network.layers[l] = std::move(pruned);
  out.network.layers[l + 1] = std::move(consumer);
  return out;
}

std::pair<Network, PruneReport> prune_network(const Network& net, const PruneSpec& spec) {
  validate(net);
  const auto prunable = prunable_layers(net);
  if (spec.budgets.size() != prunable.size()) {
    throw Error(ErrorCode::InvalidParameter,
                "prune_network: " + std::to_string(spec.budgets.size()) + " budgets given for " +
                    std::to_string(prunable.size()) + " prunable layers");
  }
  const std::optional<std::vector<double>>& fixed_beta = spec.beta ? spec.beta : net.beta;
  if (fixed_beta && fixed_beta->size() != prunable.size()) {
    throw Error(ErrorCode::InvalidParameter, "prune_network: beta list length differs from the "
                                             "number of prunable layers");
  }

  PruneReport report;
  report.method = spec.method;
  report.seed = spec.seed;
  report.delta = spec.delta;
  report.c = spec.c;
  Network current = net;
  for (std::size_t p = 0; p < prunable.size(); ++p) {
    const std::size_t layer = prunable[p];
    try {
      LayerPruneOptions opts;
      opts.budget = spec.budgets[p];
      opts.method = spec.method;
      opts.delta = spec.delta;
      opts.c = spec.c;
      opts.seed = substream_seed(spec.seed, layer);
      opts.exact_width = spec.exact_width;
      opts.beta = fixed_beta ? (*fixed_beta)[p] : propagate_beta(current, spec.input_radius)[layer];

      LayerPruneResult r = std::holds_alternative<DenseLayer>(current.layers[layer])
                               ? prune_dense(current, layer, opts)
                               : prune_conv(current, layer, opts);
      current = std::move(r.network);
      report.layers.push_back(r.entry);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(layer) + ": " + e.what());
    }
  }
  return {std::move(current), std::move(report)};
}

std::vector<double> propagate_beta(const Network& net, double beta_input) {
  if (!std::isfinite(beta_input) || !(beta_input > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "propagate_beta: input radius must be positive");
  }
  const auto shapes = layer_shapes(net);
  std::vector<double> beta{beta_input};
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const double b = beta.back();
    const Layer& layer = net.layers[i];
    double alpha = 0.0;
    double bias_max = 0.0;
    const Activation* phi = nullptr;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      for (std::size_t r = 0; r < d->out_units(); ++r) alpha = std::max(alpha, norm2(d->weights.row(r)));
      bias_max = max_abs(d->bias);
      phi = &d->activation;
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      const std::size_t ks = c->kernel_size();
      for (std::size_t r = 0; r < c->out_channels(); ++r) {
        alpha = std::max(alpha, norm2(std::span<const double>(c->kernels.data).subspan(r * ks, ks)));
      }
      bias_max = max_abs(c->bias);
      phi = &c->activation;
    } else {
      beta.push_back(b);
      continue;
    }
    const double reach = alpha * b + bias_max;
    const auto elements = static_cast<double>(Tensor::element_count(shapes[i + 1]));
    beta.push_back(std::sqrt(elements) * phi->sup_abs_on_interval(-reach, reach));
  }
  return beta;
}

}  // namespace sensprune
