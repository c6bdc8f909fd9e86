// Acceptance suite: `acceptance <n>` runs criterion n (1-9), `acceptance` runs
// all of them. Prints one PASS/FAIL line per criterion; exit status is the
// number of failures.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sensprune/counterexample.hpp"
#include "sensprune/error.hpp"
#include "sensprune/harness.hpp"
#include "sensprune/model_io.hpp"
#include "sensprune/pruning.hpp"
#include "test_util.hpp"

using namespace sensprune;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Mean of the estimator over 500 seeds within 3 standard errors of the exact
//    sum, on 5 instances x 5 queries.
Outcome unbiasedness() {
  const std::size_t seeds = 500;
  std::size_t checks = 0, ok = 0;
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 5; ++inst) {
    const std::size_t n = 20 + 20 * inst, d = 3 + 2 * inst;
    const WeightedSet ws = inst % 2 ? uniform_instance(n, d, 100 + inst, 2)
                                    : gaussian_instance(n, d, 100 + inst, 2);
    const auto phi = Activation::relu();
    const QueryBall ball(1.0, d);
    const std::size_t m = n / 2;
    Rng qrng(substream_seed(inst, 2));
    std::vector<std::vector<double>> xs;
    for (int q = 0; q < 5; ++q) xs.push_back(oracle::random_ball_point(qrng, d, 1.0));
    // est[q][i] over seeds
    std::vector<std::vector<std::vector<double>>> est(5, std::vector<std::vector<double>>(ws.k()));
    for (std::size_t s = 0; s < seeds; ++s) {
      const Coreset c = coreset_layer(ws, m, phi, ball, substream_seed(1000 + inst, s));
      for (std::size_t q = 0; q < 5; ++q)
        for (std::size_t i = 0; i < ws.k(); ++i)
          est[q][i].push_back(oracle::coreset_sum(ws, c, i, xs[q], phi));
    }
    for (std::size_t q = 0; q < 5; ++q)
      for (std::size_t i = 0; i < ws.k(); ++i) {
        const auto ms = oracle::mean_se(est[q][i]);
        const double gap = std::abs(ms.mean - oracle::exact_sum(ws, i, xs[q], phi));
        ++checks;
        // Zero spread happens when no point is active at x; then the estimate is exact.
        if (ms.se == 0.0) {
          if (gap <= 1e-12) ++ok;
          continue;
        }
        worst = std::max(worst, gap / ms.se);
        if (gap <= 3.0 * ms.se) ++ok;
      }
  }
  return {ok == checks, std::to_string(ok) + "/" + std::to_string(checks) +
                            " within 3 SE, worst " + fmt("%.2f", worst) + " SE"};
}

// Mean error per (method, budget) from a sweep.
std::map<std::pair<Method, std::size_t>, double> mean_by_budget(const SweepReport& r) {
  std::map<std::pair<Method, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& row : r.rows) {
    auto& a = acc[{row.method, row.budget}];
    a.first += row.mean_abs_err;
    a.second += 1;
  }
  std::map<std::pair<Method, std::size_t>, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
  return out;
}

// 2. Coreset below uniform and percentile in >= 80% of budgets, per instance.
Outcome baseline_ordering() {
  bool pass = true;
  std::string detail;
  for (const auto kind : {InstanceConfig::Kind::gaussian, InstanceConfig::Kind::uniform}) {
    SweepConfig cfg;
    cfg.instance.kind = kind;
    cfg.instance.n = 1000;
    cfg.instance.d = 784;
    cfg.methods = {Method::coreset, Method::uniform, Method::percentile};
    for (std::size_t m = 50; m <= 1000; m += 50) cfg.budgets.push_back(m);
    cfg.trials = 10;
    cfg.queries.beta = 1.0;
    cfg.queries.count = 200;
    cfg.master_seed = 2024;
    const auto means = mean_by_budget(run_sweep(cfg));
    std::size_t wins = 0, beat_u = 0, beat_p = 0;
    for (const std::size_t m : cfg.budgets) {
      const double c = means.at({Method::coreset, m});
      const bool bu = c < means.at({Method::uniform, m});
      const bool bp = c < means.at({Method::percentile, m});
      beat_u += bu;
      beat_p += bp;
      wins += bu && bp;
    }
    const bool ok = wins * 5 >= cfg.budgets.size() * 4;
    pass = pass && ok;
    const char* name = kind == InstanceConfig::Kind::gaussian ? "gaussian" : "uniform";
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + std::to_string(wins) + "/20" +
              " (vs uniform " + std::to_string(beat_u) + ", vs percentile " +
              std::to_string(beat_p) + ", m=500: coreset " +
              fmt("%.3g", means.at({Method::coreset, 500})) + " uniform " +
              fmt("%.3g", means.at({Method::uniform, 500})) + " percentile " +
              fmt("%.3g", means.at({Method::percentile, 500})) + ")";
  }
  return {pass, detail};
}

// 3. Log-log slope of error vs m in [-0.8, -0.3].
Outcome rate() {
  SweepConfig cfg;
  cfg.instance.kind = InstanceConfig::Kind::gaussian;
  cfg.instance.n = 200;
  cfg.instance.d = 20;
  cfg.methods = {Method::coreset};
  cfg.budgets = {25, 50, 100, 200, 400, 800};
  cfg.trials = 20;
  cfg.queries.count = 200;
  cfg.master_seed = 7;
  const auto means = mean_by_budget(run_sweep(cfg));
  std::vector<double> x, y;
  int inversions = 0;
  for (const std::size_t m : cfg.budgets) {
    x.push_back(static_cast<double>(m));
    y.push_back(means.at({Method::coreset, m}));
    if (y.size() > 1 && y.back() > y[y.size() - 2]) ++inversions;
  }
  const double slope = oracle::loglog_slope(x, y);
  return {slope >= -0.8 && slope <= -0.3 && inversions <= 1,
          "slope " + fmt("%.3f", slope) + ", inversions " + std::to_string(inversions)};
}

// 4. Calibrated c, then a fresh 1000-trial run with failure fraction <= delta.
Outcome calibration() {
  const double eps = 0.25, delta = 0.1;
  const WeightedSet ws = gaussian_instance(200, 20, 11);
  const auto phi = Activation::relu();
  const QueryBall ball(1.0, 20);
  CalibrationOptions opts;
  opts.master_seed = 1;
  const auto cal = calibrate_c(eps, delta, ws, phi, ball, opts);
  const double fresh = failure_fraction(ws, phi, ball, eps, cal.m, 100, 10, 987654321);
  return {fresh <= delta, "c " + fmt("%.4g", cal.c) + ", m " + std::to_string(cal.m) + ", t " +
                              fmt("%.4g", cal.total_sensitivity) + ", calibration failure " +
                              fmt("%.3f", cal.failure_fraction) + ", fresh failure " +
                              fmt("%.3f", fresh) + " over 1000 trials"};
}

// 5. Separating queries and ratio 1 on every tested proper subset.
Outcome counterexample() {
  const std::size_t ns[] = {4, 16, 64};
  const std::size_t ds[] = {3, 10};
  std::size_t subsets = 0, sign_fail = 0, ratio_fail = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = ns[seed % 3], d = ds[seed % 2];
    const auto pts = build_sphere_points(n, d, 0.5 + static_cast<double>(seed % 4), seed);
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = separating_query(pts, t, 1.0);
      bool ok = norm2(x) <= 1.0 && oracle::dot(pts.points.row(t).data(), x.data(), d) > 0.0;
      for (std::size_t q = 0; q < n; ++q)
        if (q != t) ok = ok && oracle::dot(pts.points.row(q).data(), x.data(), d) < 0.0;
      if (!ok) ++sign_fail;
    }
    Rng rng(substream_seed(seed, 5));
    for (int s = 0; s < 10; ++s) {
      // Random proper subset (sizes 0..n-1) with random positive weights.
      const std::size_t size = s == 0 ? n - 1 : rng.next_u64() % n;
      std::vector<std::size_t> perm(n);
      for (std::size_t j = 0; j < n; ++j) perm[j] = j;
      for (std::size_t j = n - 1; j > 0; --j) std::swap(perm[j], perm[rng.next_u64() % (j + 1)]);
      std::vector<std::size_t> sub(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
      std::vector<double> u(size);
      for (auto& v : u) v = 100.0 * rng.uniform();
      for (const std::size_t o : std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(size), perm.end())) {
        const auto w = violation_for(pts, sub, o, Activation::relu(), 1.0, u);
        worst = std::max(worst, std::abs(w.ratio - 1.0));
        if (std::abs(w.ratio - 1.0) > 1e-9) ++ratio_fail;
      }
      ++subsets;
    }
  }
  return {sign_fail == 0 && ratio_fail == 0,
          std::to_string(subsets) + " subsets, sign failures " + std::to_string(sign_fail) +
              ", ratio failures " + std::to_string(ratio_fail) + ", max |ratio-1| " +
              fmt("%.2g", worst)};
}

// 6. Pruned forward pass equals the coreset estimator; shared support.
Outcome rebuild_equivalence() {
  const Activation acts[] = {Activation::relu(), Activation::sigmoid(), Activation::softplus(),
                             Activation::soft_clip(2.0), Activation::gauss()};
  double worst = 0.0;
  std::size_t share_fail = 0;
  for (std::uint64_t c = 0; c < 50; ++c) {
    Rng rng(substream_seed(c, 61));
    const std::size_t in = 2 + rng.next_u64() % 8, hid = 3 + rng.next_u64() % 30,
                      out = 1 + rng.next_u64() % 6;
    const auto& phi = acts[c % 5];
    const Network net = testutil::random_dense_net({in, hid, out}, c, phi, 0.3);
    LayerPruneOptions o;
    o.budget = 1 + rng.next_u64() % hid;
    o.method = static_cast<Method>(c % 3);
    o.beta = propagate_beta(net, 1.0)[0];
    o.seed = c;
    const auto r = prune_dense(net, 0, o);
    const WeightedSet ws = dense_layer_to_weighted_set(net, 0);
    const auto& l0 = std::get<DenseLayer>(r.network.layers[0]);
    const auto& l1 = std::get<DenseLayer>(r.network.layers[1]);
    if (l0.out_units() != r.coreset.support_size() || l1.weights.cols() != l0.out_units() ||
        r.coreset.new_weights.rows() != out)
      ++share_fail;
    for (std::size_t s = 0; s < r.coreset.support_size(); ++s)
      for (std::size_t k = 0; k < in; ++k)
        if (l0.weights(s, k) != ws.points()(r.coreset.indices[s], k)) ++share_fail;
    for (int t = 0; t < 10; ++t) {
      const Tensor x = testutil::random_input({in}, rng);
      const Tensor z = forward_linear_part(r.network, 1, x);
      const auto& bias = std::get<DenseLayer>(net.layers[1]).bias;
      for (std::size_t i = 0; i < out; ++i)
        worst = std::max(worst, std::abs(z.data[i] - oracle::coreset_sum(ws, r.coreset, i, x.data, phi) - bias[i]));
    }
  }
  for (std::uint64_t c = 0; c < 20; ++c) {
    Rng rng(substream_seed(c, 62));
    const std::size_t ic = 1 + rng.next_u64() % 3, mid = 2 + rng.next_u64() % 6,
                      oc = 1 + rng.next_u64() % 4, k = 1 + rng.next_u64() % 3;
    const std::size_t h = 2 * k + 2 + rng.next_u64() % 3, w = 2 * k + 2 + rng.next_u64() % 3;
    const auto& phi = acts[c % 5];
    const Network net = testutil::random_conv_net({ic, mid, oc}, h, w, k, c + 500, phi, 0.2);
    LayerPruneOptions o;
    o.budget = 1 + rng.next_u64() % mid;
    o.method = static_cast<Method>(c % 3);
    o.beta = propagate_beta(net, 1.0)[0];
    o.seed = c;
    const auto r = prune_conv(net, 0, o);
    const auto& next = std::get<ConvLayer>(net.layers[1]);
    const auto& pruned_next = std::get<ConvLayer>(r.network.layers[1]);
    if (std::get<ConvLayer>(r.network.layers[0]).out_channels() != r.coreset.support_size() ||
        pruned_next.in_channels() != r.coreset.support_size() ||
        r.coreset.new_weights.rows() != oc * k * k)
      ++share_fail;
    for (int t = 0; t < 5; ++t) {
      const Tensor x = testutil::random_input({ic, h, w}, rng);
      const Tensor a = forward_prefix(net, 1, x);
      const std::size_t ah = a.shape[1], aw = a.shape[2], oh = ah - k + 1, ow = aw - k + 1;
      const Tensor z = forward_linear_part(r.network, 1, x);
      for (std::size_t i = 0; i < oc; ++i)
        for (std::size_t y = 0; y < oh; ++y)
          for (std::size_t xx = 0; xx < ow; ++xx) {
            double est = next.bias[i];
            for (std::size_t s = 0; s < r.coreset.support_size(); ++s)
              for (std::size_t dy = 0; dy < k; ++dy)
                for (std::size_t dx = 0; dx < k; ++dx)
                  est += r.coreset.new_weights(i * k * k + dy * k + dx, s) *
                         a.data[(r.coreset.indices[s] * ah + y + dy) * aw + xx + dx];
            worst = std::max(worst, std::abs(z.data[(i * oh + y) * ow + xx] - est));
          }
    }
  }
  return {worst <= 1e-10 && share_fail == 0,
          "50 dense + 20 conv, max deviation " + fmt("%.3g", worst) + ", support violations " +
              std::to_string(share_fail)};
}

// 7. Budget = width with percentile is the identity.
Outcome identity_pruning() {
  bool pass = true;
  double l1 = 0.0;
  std::vector<Network> nets{testutil::random_dense_net({12, 30, 20, 5}, 1, Activation::softplus(), 0.4),
                            testutil::random_conv_net({2, 6, 4, 3}, 9, 9, 3, 2, Activation::relu(), 0.1)};
  for (const Network& net : nets) {
    PruneSpec spec;
    spec.method = Method::percentile;
    for (const std::size_t i : prunable_layers(net)) spec.budgets.push_back(layer_width(net.layers[i]));
    const Network same = prune_network(net, spec).first;
    const std::size_t dim = Tensor::element_count(net.input_shape);
    const Matrix qs = uniform_ball_queries(1.0, dim, 100, 3).queries;
    for (std::size_t q = 0; q < qs.rows(); ++q) {
      const Tensor x(net.input_shape, std::vector<double>(qs.row(q).begin(), qs.row(q).end()));
      pass = pass && forward(net, x) == forward(same, x);
    }
    l1 += network_l1_error(net, same, qs);
  }
  return {pass && l1 == 0.0, std::string("outputs bit-equal: ") + (pass ? "yes" : "no") +
                                 ", network_l1_error " + fmt("%.17g", l1)};
}

// 8. Byte-identical reruns of `sweep` and `prune`.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "sensprune_acceptance_8";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto p = [&](const char* f) { return (dir / f).string(); };
  write_text_file(dir / "sweep.json", R"({
    "instance": {"kind": "gaussian", "n": 300, "d": 30, "k": 2},
    "methods": ["coreset", "uniform", "percentile"],
    "budgets": {"start": 25, "stop": 300, "step": 25},
    "trials": 4,
    "queries": {"kind": "uniform_ball", "beta": 1.0, "count": 64},
    "master_seed": 99
  })");
  save_model(testutil::random_dense_net({20, 60, 30, 4}, 3, Activation::relu(), 0.1), dir / "net.nnj");
  int codes = 0;
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    codes += testutil::run_cli({"sweep", "--config", p("sweep.json"), "--out", p(("s" + t + ".csv").c_str())}).code;
    codes += testutil::run_cli({"prune", "--model", p("net.nnj"), "--budgets", "20,10", "--seed", "5",
                                "--exact-width", "--out", p(("m" + t + ".nnj").c_str()),
                                "--report", p(("r" + t + ".json").c_str())}).code;
  }
  const bool same = codes == 0 && read_text_file(dir / "sa.csv") == read_text_file(dir / "sb.csv") &&
                    read_text_file(dir / "ma.nnj") == read_text_file(dir / "mb.nnj") &&
                    read_text_file(dir / "ra.json") == read_text_file(dir / "rb.json");
  const std::size_t bytes = codes == 0 ? read_text_file(dir / "sa.csv").size() : 0;
  std::filesystem::remove_all(dir);
  return {same, "exit codes sum " + std::to_string(codes) + ", csv " + std::to_string(bytes) +
                    " bytes, csv/model/report identical: " + (same ? "yes" : "no")};
}

// 9. Bound arithmetic through the CLI.
Outcome bound() {
  const auto r = testutil::run_cli({"bound", "--t", "10", "--d", "5", "--eps", "0.1", "--delta", "0.1", "--c", "1"});
  return {r.code == 0 && r.out == "13816\n", "printed '" + r.out.substr(0, r.out.find('\n')) + "'"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"unbiasedness", unbiasedness},
      {"ordering-vs-baselines", baseline_ordering},
      {"error-rate", rate},
      {"calibrated-guarantee", calibration},
      {"multiplicative-impossibility", counterexample},
      {"rebuild-equivalence", rebuild_equivalence},
      {"identity-pruning", identity_pruning},
      {"determinism", determinism},
      {"bound-arithmetic", bound}};
  std::vector<std::size_t> which;
  if (argc > 1) {
    const long n = std::strtol(argv[1], nullptr, 10);
    if (n < 1 || n > static_cast<long>(criteria.size())) {
      std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
      return 64;
    }
    which.push_back(static_cast<std::size_t>(n));
  } else {
    for (std::size_t i = 1; i <= criteria.size(); ++i) which.push_back(i);
  }
  int failures = 0;
  for (const std::size_t i : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << i << " (" << criteria[i - 1].first << "): "
              << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << " [" << fmt("%.1f", secs)
              << " s]\n";
    failures += !o.pass;
  }
  return failures;
}
