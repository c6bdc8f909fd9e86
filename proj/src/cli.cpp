#include "sensprune/cli.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensprune/counterexample.hpp"
#include "sensprune/error.hpp"
#include "sensprune/harness.hpp"
#include "sensprune/model_io.hpp"
#include "sensprune/pruning.hpp"
#include "sensprune/rng.hpp"

namespace sensprune {

using nlohmann::json;

namespace {

struct PruneArgs {
  std::string model, budgets, method = "coreset", out, report;
  std::optional<double> beta;
  std::uint64_t seed = 0;
  double delta = 0.1, c = 1.0;
  bool exact_width = false;
};

struct EvalArgs {
  std::string original, pruned, queries;
  std::optional<double> ball;
  std::size_t count = 100;
  std::uint64_t seed = 0;
};

struct SweepArgs {
  std::string config, out;
};

struct CounterexampleArgs {
  std::size_t n = 8, d = 3, subset_size = 0;
  double alpha = 1.0, beta = 1.0;
  std::uint64_t seed = 0;
  std::string activation = "relu", out;
};

struct BoundArgs {
  double t = 0.0, eps = 0.0, delta = 0.0, c = 1.0;
  std::size_t d = 1;
};

struct CalibrateArgs {
  double eps = 0.0, delta = 0.0;
  std::string config, out;
};

std::vector<std::size_t> parse_budget_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok.front() == '-') {
      throw Error(ErrorCode::InvalidParameter, "--budgets: bad entry '" + tok + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidParameter, "--budgets: empty list");
  return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

void run_prune(const PruneArgs& a, std::ostream& out) {
  const Network net = load_model(a.model);
  PruneSpec spec;
  spec.budgets = parse_budget_list(a.budgets);
  spec.method = parse_method(a.method);
  if (a.beta) spec.input_radius = *a.beta;
  spec.seed = a.seed;
  spec.delta = a.delta;
  spec.c = a.c;
  spec.exact_width = a.exact_width;
  const auto [pruned, report] = prune_network(net, spec);
  save_model(pruned, a.out);
  emit(a.report, report_to_json(report).dump(2) + "\n", out);
}

void run_eval(const EvalArgs& a, std::ostream& out) {
  const Network original = load_model(a.original);
  const Network pruned = load_model(a.pruned);
  const std::size_t in_size = Tensor::element_count(original.input_shape);
  QuerySet qs;
  if (!a.queries.empty()) {
    qs = dataset_queries(a.queries, a.ball.value_or(1.0));
  } else {
    qs = uniform_ball_queries(a.ball.value_or(1.0), in_size, a.count, a.seed);
  }
  const double err = network_l1_error(original, pruned, qs.queries);
  json j;
  j["mean_l1_error"] = err;
  j["queries"] = qs.queries.rows();
  j["rescaled"] = qs.rescaled;
  out << j.dump() << "\n";
}

void run_sweep_cmd(const SweepArgs& a, std::ostream& out) {
  const json j = parse_json_file(a.config);
  const auto base = std::filesystem::path(a.config).parent_path();
  const SweepConfig cfg = parse_sweep_config(j, base);
  const SweepReport report = run_sweep(cfg);
  emit(a.out, sweep_to_csv(report), out);
}

void run_counterexample(const CounterexampleArgs& a, std::ostream& out) {
  const Activation phi = parse_activation(a.activation);
  const SpherePointSet pts = build_sphere_points(a.n, a.d, a.alpha, a.seed);
  if (a.subset_size >= a.n) {
    throw Error(ErrorCode::InvalidSubset, "--subset-size must be smaller than --n");
  }
  // Random proper subset with arbitrary positive weights.
  Rng rng(substream_seed(a.seed, 1));
  std::vector<std::size_t> order(a.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = a.n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(a.subset_size));
  std::sort(subset.begin(), subset.end());
  std::vector<double> weights(subset.size());
  for (auto& w : weights) w = 2.0 * rng.uniform() + 1e-3;

  json j;
  j["n"] = a.n;
  j["d"] = a.d;
  j["alpha"] = a.alpha;
  j["beta"] = a.beta;
  j["activation"] = std::string(phi.name());
  j["seed"] = a.seed;
  j["points"] = json::array();
  for (std::size_t r = 0; r < pts.points.rows(); ++r) {
    const auto row = pts.points.row(r);
    j["points"].push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["subset"] = subset;
  j["subset_weights"] = weights;
  j["witnesses"] = json::array();
  for (std::size_t p = 0; p < a.n; ++p) {
    if (std::binary_search(subset.begin(), subset.end(), p)) continue;
    const auto w = violation_for(pts, subset, p, phi, a.beta, weights);
    j["witnesses"].push_back({{"omitted", w.omitted},
                              {"query", w.query},
                              {"full_sum", w.full_sum},
                              {"coreset_sum", w.coreset_sum},
                              {"ratio", w.ratio}});
  }
  emit(a.out, j.dump(2) + "\n", out);
}

void run_bound(const BoundArgs& a, std::ostream& out) {
  out << required_sample_size(a.t, a.d, a.eps, a.delta, a.c) << "\n";
}

void run_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const json j = parse_json_file(a.config);
  const CalibrationConfig cfg =
      parse_calibration_config(j, std::filesystem::path(a.config).parent_path());
  const WeightedSet ws = make_instance(cfg.instance, cfg.instance_seed);
  const QueryBall ball(cfg.beta, ws.d());
  const auto result = calibrate_c(a.eps, a.delta, ws, cfg.activation, ball, cfg.options);
  emit(a.out, calibration_to_json(result, a.eps, a.delta).dump(2) + "\n", out);
}

void report_error(std::ostream& err, bool as_json, std::string_view code, const std::string& msg) {
  if (as_json) {
    err << json{{"error", std::string(code)}, {"message", msg}}.dump() << "\n";
  } else {
    err << "error (" << code << "): " << msg << "\n";
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-independent structured pruning with sensitivity-sampled coresets", "sensprune"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Report errors as JSON on stderr");

  PruneArgs prune;
  auto* prune_cmd = app.add_subcommand("prune", "Prune a model file layer by layer");
  prune_cmd->add_option("--model", prune.model, "Input .nnj model")->required();
  prune_cmd->add_option("--budgets", prune.budgets, "Comma-separated width per prunable layer")->required();
  prune_cmd->add_option("--method", prune.method, "coreset|uniform|percentile");
  prune_cmd->add_option("--beta", prune.beta, "Input-ball radius used when the model has no beta");
  prune_cmd->add_option("--seed", prune.seed, "Master seed");
  prune_cmd->add_option("--out", prune.out, "Output .nnj model")->required();
  prune_cmd->add_option("--report", prune.report, "Report JSON path (default: stdout)");
  prune_cmd->add_option("--delta", prune.delta, "Failure probability for the certified epsilon");
  prune_cmd->add_option("--c", prune.c, "Sample-size constant for the certified epsilon");
  prune_cmd->add_flag("--exact-width", prune.exact_width, "Redraw until the support reaches the budget");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Mean L1 output error between two models");
  eval_cmd->add_option("--original", eval.original)->required();
  eval_cmd->add_option("--pruned", eval.pruned)->required();
  eval_cmd->add_option("--queries", eval.queries, "Row-major query vectors (text)");
  eval_cmd->add_option("--ball", eval.ball, "Query-ball radius (default 1)");
  eval_cmd->add_option("--count", eval.count, "Number of uniform-ball queries");
  eval_cmd->add_option("--seed", eval.seed);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Error-vs-size sweep, written as CSV");
  sweep_cmd->add_option("--config", sweep.config, "Sweep config (JSON)")->required();
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default: stdout)");

  CounterexampleArgs cx;
  auto* cx_cmd = app.add_subcommand("counterexample", "Multiplicative-error impossibility demo");
  cx_cmd->add_option("--n", cx.n);
  cx_cmd->add_option("--d", cx.d);
  cx_cmd->add_option("--alpha", cx.alpha);
  cx_cmd->add_option("--beta", cx.beta);
  cx_cmd->add_option("--subset-size", cx.subset_size);
  cx_cmd->add_option("--seed", cx.seed);
  cx_cmd->add_option("--activation", cx.activation);
  cx_cmd->add_option("--out", cx.out, "JSON path (default: stdout)");

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Required coreset sample size");
  bound_cmd->add_option("--t", bound.t, "Total sensitivity")->required();
  bound_cmd->add_option("--d", bound.d, "Dimension")->required();
  bound_cmd->add_option("--eps", bound.eps)->required();
  bound_cmd->add_option("--delta", bound.delta)->required();
  bound_cmd->add_option("--c", bound.c);

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Empirically calibrate the sample-size constant");
  cal_cmd->add_option("--eps", cal.eps)->required();
  cal_cmd->add_option("--delta", cal.delta)->required();
  cal_cmd->add_option("--config", cal.config, "Calibration config (JSON)")->required();
  cal_cmd->add_option("--out", cal.out, "JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, as_json, "UsageError", e.what());
    return 1;
  }

  try {
    if (*prune_cmd) run_prune(prune, out);
    else if (*eval_cmd) run_eval(eval, out);
    else if (*sweep_cmd) run_sweep_cmd(sweep, out);
    else if (*cx_cmd) run_counterexample(cx, out);
    else if (*bound_cmd) run_bound(bound, out);
    else if (*cal_cmd) run_calibrate(cal, out);
  } catch (const Error& e) {
    report_error(err, as_json, to_string(e.code()), e.what());
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    report_error(err, as_json, "RuntimeError", e.what());
    return 2;
  }
  return 0;
}

}  // namespace sensprune
