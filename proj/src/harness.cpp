#include "sensprune/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "sensprune/error.hpp"
#include "sensprune/model_io.hpp"
#include "sensprune/pruning.hpp"
#include "sensprune/rng.hpp"

namespace sensprune {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInstanceStream = 1;
constexpr std::uint64_t kQueryStream = 2;
constexpr std::uint64_t kTrialStream = 3;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

void scale_rows_to_unit_max(Matrix& points) {
  double max_norm = 0.0;
  for (std::size_t j = 0; j < points.rows(); ++j) max_norm = std::max(max_norm, norm2(points.row(j)));
  if (max_norm > 0.0) {
    for (auto& v : points.data()) v /= max_norm;
  }
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

// ---------------------------------------------------------------- queries

QuerySet uniform_ball_queries(double beta, std::size_t d, std::size_t count, std::uint64_t seed) {
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "uniform_ball_queries: beta must be positive");
  }
  if (d == 0) throw Error(ErrorCode::InvalidParameter, "uniform_ball_queries: d must be >= 1");
  Rng rng(seed);
  QuerySet out{Matrix(count, d), 0};
  for (std::size_t q = 0; q < count; ++q) {
    auto row = out.queries.row(q);
    double len = 0.0;
    do {
      len = 0.0;
      for (auto& v : row) {
        v = rng.normal();
        len += v * v;
      }
    } while (len == 0.0);
    len = std::sqrt(len);
    const double radius = beta * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    for (auto& v : row) v *= radius / len;
  }
  return out;
}

QuerySet parse_dataset_queries(const std::string& text, double beta) {
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "dataset queries: beta must be positive");
  }
  std::vector<double> values;
  std::size_t width = 0, rows = 0, line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string tok;
    std::size_t count = 0;
    while (ls >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError,
                    "dataset line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      values.push_back(v);
      ++count;
    }
    if (count == 0) continue;
    if (width == 0) width = count;
    if (count != width) {
      throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " values, got " +
                                             std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::ParseError, "dataset has no rows");
  QuerySet out{Matrix(rows, width, std::move(values)), 0};
  for (std::size_t q = 0; q < rows; ++q) {
    auto row = out.queries.row(q);
    const double len = norm2(row);
    if (len > beta) {
      for (auto& v : row) v *= beta / len;
      ++out.rescaled;
    }
  }
  return out;
}

QuerySet dataset_queries(const std::filesystem::path& path, double beta) {
  return parse_dataset_queries(read_text_file(path), beta);
}

// ---------------------------------------------------------------- metrics

NeuronErrorEvaluator::NeuronErrorEvaluator(const WeightedSet& ws, const Activation& phi,
                                           const Matrix& queries, kernels::Exec exec) {
  if (queries.cols() != ws.d()) {
    throw Error(ErrorCode::ShapeMismatch, "queries have dimension " +
                                              std::to_string(queries.cols()) + ", points " +
                                              std::to_string(ws.d()));
  }
  act_ = kernels::activation_matrix(exec, ws.points(), ws.offsets(), queries, phi);
  const auto all = iota_indices(ws.n());
  exact_ = kernels::combine(exec, act_, all, ws.weights());
}

Matrix NeuronErrorEvaluator::coreset_sums(const Coreset& c) const {
  if (c.new_weights.rows() != exact_.cols() || c.new_weights.cols() != c.indices.size()) {
    throw Error(ErrorCode::ShapeMismatch, "coreset does not match the evaluated set");
  }
  for (const auto i : c.indices) {
    if (i >= act_.rows()) throw Error(ErrorCode::IndexOutOfRange, "coreset index out of range");
  }
  return kernels::combine_serial(act_, c.indices, c.new_weights);
}

std::vector<double> NeuronErrorEvaluator::per_query_error(const Coreset& c) const {
  const Matrix approx = coreset_sums(c);
  std::vector<double> err(exact_.rows(), 0.0);
  const double k = static_cast<double>(exact_.cols());
  for (std::size_t q = 0; q < exact_.rows(); ++q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < exact_.cols(); ++i) acc += std::abs(exact_(q, i) - approx(q, i));
    err[q] = acc / k;
  }
  return err;
}

double NeuronErrorEvaluator::mean_error(const Coreset& c) const {
  const auto err = per_query_error(c);
  if (err.empty()) return 0.0;
  return std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(err.size());
}

double neuron_additive_error(const WeightedSet& ws, const Coreset& coreset, const Activation& phi,
                             const Matrix& queries) {
  return NeuronErrorEvaluator(ws, phi, queries).mean_error(coreset);
}

double network_l1_error(const Network& original, const Network& pruned, const Matrix& queries) {
  validate(original);
  validate(pruned);
  if (original.input_shape != pruned.input_shape) {
    throw Error(ErrorCode::ShapeMismatch, "networks have different input shapes");
  }
  if (layer_shapes(original).back() != layer_shapes(pruned).back()) {
    throw Error(ErrorCode::ShapeMismatch, "networks have different output shapes");
  }
  const std::size_t in_size = Tensor::element_count(original.input_shape);
  if (queries.cols() != in_size) {
    throw Error(ErrorCode::ShapeMismatch, "queries have " + std::to_string(queries.cols()) +
                                              " values, network input has " +
                                              std::to_string(in_size));
  }
  const auto nq = static_cast<std::int64_t>(queries.rows());
  if (nq == 0) return 0.0;
  std::vector<double> l1(queries.rows(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t q = 0; q < nq; ++q) {
    const auto row = queries.row(static_cast<std::size_t>(q));
    const Tensor x(original.input_shape, std::vector<double>(row.begin(), row.end()));
    const Tensor a = forward(original, x, kernels::Exec::serial);
    const Tensor b = forward(pruned, x, kernels::Exec::serial);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
    l1[static_cast<std::size_t>(q)] = acc;
  }
  return std::accumulate(l1.begin(), l1.end(), 0.0) / static_cast<double>(l1.size());
}

// ---------------------------------------------------------------- instances

WeightedSet gaussian_instance(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t k) {
  Rng rng(seed);
  Matrix points(n, d);
  for (auto& v : points.data()) v = rng.normal();
  scale_rows_to_unit_max(points);
  Matrix weights(k, n);
  for (auto& v : weights.data()) v = rng.normal();
  return WeightedSet(std::move(points), std::move(weights));
}

WeightedSet uniform_instance(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t k) {
  Rng rng(seed);
  Matrix points(n, d);
  for (auto& v : points.data()) v = rng.uniform();
  scale_rows_to_unit_max(points);
  Matrix weights(k, n);
  for (auto& v : weights.data()) v = rng.uniform();
  return WeightedSet(std::move(points), std::move(weights));
}

WeightedSet make_instance(const InstanceConfig& cfg, std::uint64_t seed) {
  switch (cfg.kind) {
    case InstanceConfig::Kind::gaussian: return gaussian_instance(cfg.n, cfg.d, seed, cfg.k);
    case InstanceConfig::Kind::uniform: return uniform_instance(cfg.n, cfg.d, seed, cfg.k);
    case InstanceConfig::Kind::model_layer: {
      const Network net = load_model(cfg.path);
      if (cfg.layer + 1 < net.layers.size() &&
          std::holds_alternative<ConvLayer>(net.layers[cfg.layer])) {
        return conv_layer_to_weighted_set(net, cfg.layer);
      }
      return dense_layer_to_weighted_set(net, cfg.layer);
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown instance kind");
}

QuerySet make_queries(const QueryConfig& cfg, std::size_t d, std::uint64_t seed) {
  if (cfg.kind == QueryConfig::Kind::dataset) {
    QuerySet qs = dataset_queries(cfg.path, cfg.beta);
    if (qs.queries.cols() != d) {
      throw Error(ErrorCode::ShapeMismatch, "dataset rows have " +
                                                std::to_string(qs.queries.cols()) +
                                                " values, instance dimension is " +
                                                std::to_string(d));
    }
    return qs;
  }
  return uniform_ball_queries(cfg.beta, d, cfg.count, seed);
}

// ---------------------------------------------------------------- config parsing

namespace {

std::size_t cfg_count(const json& j, const std::string& field, std::size_t min = 0) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(min)) {
    config_fail(field, "expected an integer >= " + std::to_string(min));
  }
  return j.get<std::size_t>();
}

double cfg_positive(const json& j, const std::string& field) {
  if (!j.is_number() || !(j.get<double>() > 0.0)) config_fail(field, "expected a positive number");
  return j.get<double>();
}

std::uint64_t cfg_seed(const json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    config_fail(field, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

const json& cfg_require(const json& j, const char* key, const std::string& prefix) {
  const std::string field = prefix.empty() ? key : prefix + "." + key;
  if (!j.is_object() || !j.contains(key)) config_fail(field, "missing");
  return j.at(key);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

InstanceConfig parse_instance(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) config_fail("instance", "expected an object");
  InstanceConfig cfg;
  const json& kind = cfg_require(j, "kind", "instance");
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "gaussian" || k == "uniform") {
    cfg.kind = k == "gaussian" ? InstanceConfig::Kind::gaussian : InstanceConfig::Kind::uniform;
    cfg.n = cfg_count(cfg_require(j, "n", "instance"), "instance.n", 1);
    cfg.d = cfg_count(cfg_require(j, "d", "instance"), "instance.d", 1);
    if (j.contains("k")) cfg.k = cfg_count(j.at("k"), "instance.k", 1);
  } else if (k == "model_layer") {
    cfg.kind = InstanceConfig::Kind::model_layer;
    const json& p = cfg_require(j, "path", "instance");
    if (!p.is_string()) config_fail("instance.path", "expected a string");
    cfg.path = resolve(p.get<std::string>(), base);
    cfg.layer = cfg_count(cfg_require(j, "layer", "instance"), "instance.layer");
  } else {
    config_fail("instance.kind", "expected gaussian|uniform|model_layer");
  }
  return cfg;
}

QueryConfig parse_queries(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) config_fail("queries", "expected an object");
  QueryConfig cfg;
  const json& kind = cfg_require(j, "kind", "queries");
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (j.contains("beta")) cfg.beta = cfg_positive(j.at("beta"), "queries.beta");
  if (k == "uniform_ball") {
    cfg.kind = QueryConfig::Kind::uniform_ball;
    cfg.count = cfg_count(cfg_require(j, "count", "queries"), "queries.count", 1);
  } else if (k == "dataset") {
    cfg.kind = QueryConfig::Kind::dataset;
    const json& p = cfg_require(j, "path", "queries");
    if (!p.is_string()) config_fail("queries.path", "expected a string");
    cfg.path = resolve(p.get<std::string>(), base);
  } else {
    config_fail("queries.kind", "expected uniform_ball|dataset");
  }
  return cfg;
}

Activation parse_cfg_activation(const json& j) {
  try {
    if (j.is_string()) return parse_activation(j.get<std::string>());
    if (j.is_object()) {
      const auto& kind = cfg_require(j, "kind", "activation");
      if (!kind.is_string()) config_fail("activation.kind", "expected a string");
      const auto v = parse_activation_variant(kind.get<std::string>());
      if (!v) config_fail("activation.kind", "unknown activation");
      if (*v == ActivationVariant::soft_clip) {
        return Activation::soft_clip(j.contains("alpha") ? cfg_positive(j.at("alpha"), "activation.alpha") : 1.0);
      }
      return Activation::from_variant(*v);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail("activation", e.what());
  }
  config_fail("activation", "expected a name or {\"kind\": ...}");
}

std::vector<std::size_t> parse_budgets(const json& j) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(cfg_count(j[i], "budgets[" + std::to_string(i) + "]", 1));
    }
  } else if (j.is_object()) {
    const auto start = cfg_count(cfg_require(j, "start", "budgets"), "budgets.start", 1);
    const auto stop = cfg_count(cfg_require(j, "stop", "budgets"), "budgets.stop", 1);
    const auto step = cfg_count(cfg_require(j, "step", "budgets"), "budgets.step", 1);
    for (std::size_t b = start; b <= stop; b += step) out.push_back(b);
  } else {
    config_fail("budgets", "expected an array or {start, stop, step}");
  }
  if (out.empty()) config_fail("budgets", "no budgets");
  return out;
}

}  // namespace

SweepConfig parse_sweep_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_fail("<root>", "expected an object");
  SweepConfig cfg;
  cfg.instance = parse_instance(cfg_require(j, "instance", ""), base_dir);
  const json& methods = cfg_require(j, "methods", "");
  if (!methods.is_array() || methods.empty()) config_fail("methods", "expected a non-empty array");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto field = "methods[" + std::to_string(i) + "]";
    if (!methods[i].is_string()) config_fail(field, "expected a string");
    try {
      cfg.methods.push_back(parse_method(methods[i].get<std::string>()));
    } catch (const Error& e) {
      config_fail(field, e.what());
    }
  }
  std::sort(cfg.methods.begin(), cfg.methods.end());
  cfg.methods.erase(std::unique(cfg.methods.begin(), cfg.methods.end()), cfg.methods.end());
  cfg.budgets = parse_budgets(cfg_require(j, "budgets", ""));
  cfg.trials = cfg_count(cfg_require(j, "trials", ""), "trials", 1);
  cfg.queries = parse_queries(cfg_require(j, "queries", ""), base_dir);
  cfg.master_seed = cfg_seed(cfg_require(j, "master_seed", ""), "master_seed");
  if (j.contains("activation")) cfg.activation = parse_cfg_activation(j.at("activation"));
  if (j.contains("beta")) cfg.beta = cfg_positive(j.at("beta"), "beta");

  const bool percentile =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::percentile) != cfg.methods.end();
  if (percentile && cfg.instance.kind != InstanceConfig::Kind::model_layer) {
    for (std::size_t i = 0; i < cfg.budgets.size(); ++i) {
      if (cfg.budgets[i] > cfg.instance.n) {
        config_fail("budgets[" + std::to_string(i) + "]",
                    "percentile budget exceeds instance size n = " + std::to_string(cfg.instance.n));
      }
    }
  }
  return cfg;
}

CalibrationConfig parse_calibration_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_fail("<root>", "expected an object");
  CalibrationConfig cfg;
  cfg.instance = parse_instance(cfg_require(j, "instance", ""), base_dir);
  if (j.contains("activation")) cfg.activation = parse_cfg_activation(j.at("activation"));
  if (j.contains("beta")) cfg.beta = cfg_positive(j.at("beta"), "beta");
  if (j.contains("instance_seed")) cfg.instance_seed = cfg_seed(j.at("instance_seed"), "instance_seed");
  if (j.contains("master_seed")) cfg.options.master_seed = cfg_seed(j.at("master_seed"), "master_seed");
  if (j.contains("seeds")) cfg.options.seeds = cfg_count(j.at("seeds"), "seeds", 1);
  if (j.contains("queries_per_seed")) {
    cfg.options.queries_per_seed = cfg_count(j.at("queries_per_seed"), "queries_per_seed", 1);
  }
  if (cfg.options.seeds * cfg.options.queries_per_seed < 1000) {
    config_fail("seeds", "seeds * queries_per_seed must be at least 1000");
  }
  if (j.contains("floor")) cfg.options.floor = cfg_positive(j.at("floor"), "floor");
  if (j.contains("tolerance")) cfg.options.tolerance = cfg_positive(j.at("tolerance"), "tolerance");
  return cfg;
}

// ---------------------------------------------------------------- sweeps

std::uint64_t sweep_trial_seed(std::uint64_t master, Method method, std::size_t budget,
                               std::size_t trial) {
  std::uint64_t s = substream_seed(master, kTrialStream);
  s = substream_seed(s, static_cast<std::uint64_t>(method));
  s = substream_seed(s, budget);
  return substream_seed(s, trial);
}

SweepReport run_sweep(const SweepConfig& cfg) {
  if (cfg.methods.empty() || cfg.budgets.empty() || cfg.trials == 0) {
    throw Error(ErrorCode::ConfigError, "sweep: methods, budgets and trials must be non-empty");
  }
  const WeightedSet ws = make_instance(cfg.instance, substream_seed(cfg.master_seed, kInstanceStream));
  const QuerySet qs = make_queries(cfg.queries, ws.d(), substream_seed(cfg.master_seed, kQueryStream));
  const QueryBall ball(cfg.beta.value_or(cfg.queries.beta), ws.d());
  const NeuronErrorEvaluator eval(ws, cfg.activation, qs.queries);

  std::vector<Method> methods = cfg.methods;
  std::sort(methods.begin(), methods.end());
  std::vector<std::size_t> budgets = cfg.budgets;
  std::sort(budgets.begin(), budgets.end());

  SweepReport report;
  report.rescaled_queries = qs.rescaled;
  for (const auto m : methods)
    for (const auto b : budgets)
      for (std::size_t t = 0; t < cfg.trials; ++t) report.rows.push_back({m, b, t, 0.0, 0.0});

  for (const auto b : budgets) {
    if (std::find(methods.begin(), methods.end(), Method::percentile) != methods.end() &&
        b > ws.n()) {
      throw Error(ErrorCode::ConfigError, "sweep: percentile budget " + std::to_string(b) +
                                              " exceeds instance size " + std::to_string(ws.n()));
    }
  }

  const auto jobs = static_cast<std::int64_t>(report.rows.size());
  std::vector<std::string> errors(report.rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t job = 0; job < jobs; ++job) {
    auto& row = report.rows[static_cast<std::size_t>(job)];
    try {
      const auto seed = sweep_trial_seed(cfg.master_seed, row.method, row.budget, row.trial);
      const Coreset c = build_coreset(row.method, ws, row.budget, cfg.activation, ball, seed);
      const auto err = eval.per_query_error(c);
      const double mean = std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(err.size());
      double var = 0.0;
      for (const double e : err) var += (e - mean) * (e - mean);
      row.mean_abs_err = mean;
      row.std_abs_err = err.size() > 1 ? std::sqrt(var / static_cast<double>(err.size() - 1)) : 0.0;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(job)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorCode::InvalidParameter, "sweep: " + e);
  }
  return report;
}

std::string sweep_to_csv(const SweepReport& report) {
  std::string out = "method,budget,trial,mean_abs_err\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.mean_abs_err);
    out += std::string(to_string(r.method)) + "," + std::to_string(r.budget) + "," +
           std::to_string(r.trial) + "," + buf + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- calibration

double failure_fraction(const WeightedSet& ws, const Activation& phi, const QueryBall& ball,
                        double eps, std::uint64_t m, std::size_t seeds,
                        std::size_t queries_per_seed, std::uint64_t master_seed) {
  if (seeds == 0 || queries_per_seed == 0) {
    throw Error(ErrorCode::InvalidParameter, "failure_fraction: need at least one trial");
  }
  const SamplingPlan plan = sampling_plan(ws, phi, ball);
  const std::uint64_t coreset_stream = substream_seed(master_seed, kTrialStream);
  const std::uint64_t query_stream = substream_seed(master_seed, kQueryStream);
  const auto nseeds = static_cast<std::int64_t>(seeds);
  std::size_t failures = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : failures)
  for (std::int64_t s = 0; s < nseeds; ++s) {
    const auto draws = draw_indices(plan, m, substream_seed(coreset_stream, static_cast<std::uint64_t>(s)));
    const Coreset c = merge_duplicates(draws, ws, plan, m);
    const QuerySet qs = uniform_ball_queries(ball.beta, ws.d(), queries_per_seed,
                                             substream_seed(query_stream, static_cast<std::uint64_t>(s)));
    const Matrix act = kernels::activation_matrix_serial(ws.points(), ws.offsets(), qs.queries, phi);
    const auto all = iota_indices(ws.n());
    const Matrix exact = kernels::combine_serial(act, all, ws.weights());
    const Matrix approx = kernels::combine_serial(act, c.indices, c.new_weights);
    for (std::size_t q = 0; q < queries_per_seed; ++q) {
      double worst = 0.0;
      for (std::size_t i = 0; i < ws.k(); ++i) worst = std::max(worst, std::abs(exact(q, i) - approx(q, i)));
      if (worst > eps) ++failures;
    }
  }
  return static_cast<double>(failures) / static_cast<double>(seeds * queries_per_seed);
}

CalibrationResult calibrate_c(double eps, double delta, const WeightedSet& ws,
                              const Activation& phi, const QueryBall& ball,
                              const CalibrationOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "calibrate_c: eps and delta must lie in (0, 1)");
  }
  if (!(opts.floor > 0.0) || !(opts.tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "calibrate_c: floor and tolerance must be positive");
  }
  const SamplingPlan plan = sampling_plan(ws, phi, ball);
  CalibrationResult result;
  result.total_sensitivity = plan.total_sensitivity;
  result.dimension = ws.d();
  result.trials = opts.seeds * opts.queries_per_seed;
  if (plan.exact) {
    result.c = opts.floor;
    result.m = 1;
    return result;
  }

  auto evaluate = [&](double c) {
    const auto m = required_sample_size(plan.total_sensitivity, ws.d(), eps, delta, c);
    if (m > opts.max_sample_size) {
      throw Error(ErrorCode::NonConvergent,
                  "calibrate_c: sample size " + std::to_string(m) + " at c = " + std::to_string(c) +
                      " exceeds the practical limit before the failure rate reached delta");
    }
    const double f = failure_fraction(ws, phi, ball, eps, m, opts.seeds, opts.queries_per_seed,
                                      opts.master_seed);
    result.path.push_back({c, m, f});
    return result.path.back();
  };

  CalibrationStep best = evaluate(opts.floor);
  if (best.failure_fraction <= delta) {
    result.c = best.c;
    result.m = best.m;
    result.failure_fraction = best.failure_fraction;
    return result;
  }
  double lo = opts.floor;
  double hi = opts.floor;
  for (;;) {
    hi *= 2.0;
    if (hi > opts.max_c) {
      throw Error(ErrorCode::NonConvergent, "calibrate_c: failure rate still above delta at c = " +
                                                std::to_string(hi / 2.0));
    }
    const auto step = evaluate(hi);
    if (step.failure_fraction <= delta) {
      best = step;
      break;
    }
    lo = hi;
  }
  while (hi - lo > opts.tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    const auto step = evaluate(mid);
    if (step.failure_fraction <= delta) {
      hi = mid;
      best = step;
    } else {
      lo = mid;
    }
  }
  result.c = best.c;
  result.m = best.m;
  result.failure_fraction = best.failure_fraction;
  return result;
}

json calibration_to_json(const CalibrationResult& r, double eps, double delta) {
  json j;
  j["eps"] = eps;
  j["delta"] = delta;
  j["c"] = r.c;
  j["m"] = r.m;
  j["failure_fraction"] = r.failure_fraction;
  j["total_sensitivity"] = r.total_sensitivity;
  j["dimension"] = r.dimension;
  j["trials"] = r.trials;
  j["path"] = json::array();
  for (const auto& s : r.path) {
    j["path"].push_back({{"c", s.c}, {"m", s.m}, {"failure_fraction", s.failure_fraction}});
  }
  return j;
}

}  // namespace sensprune
