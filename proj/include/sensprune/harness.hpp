#pragma once

// Experiment harness: query sources, error metrics, synthetic instances,
// coreset-size sweeps and calibration of the sample-size constant.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensprune/baselines.hpp"
#include "sensprune/coreset.hpp"
#include "sensprune/kernels.hpp"
#include "sensprune/network.hpp"

namespace sensprune {

// ---------------------------------------------------------------- queries

struct QuerySet {
  Matrix queries;  // one query per row, all with norm <= beta
  std::size_t rescaled = 0;
};

/// `count` points uniform in the radius-beta ball of R^d.
QuerySet uniform_ball_queries(double beta, std::size_t d, std::size_t count, std::uint64_t seed);

/// Rows of numbers separated by commas and/or whitespace ('#' starts a
/// comment). Rows with norm above beta are scaled onto the sphere and counted.
QuerySet dataset_queries(const std::filesystem::path& path, double beta);
QuerySet parse_dataset_queries(const std::string& text, double beta);

// ---------------------------------------------------------------- metrics

/// Precomputes phi(p_j . x_q + b_j) and the exact sums so that many coresets
/// of the same set can be scored cheaply.
class NeuronErrorEvaluator {
 public:
  NeuronErrorEvaluator(const WeightedSet& ws, const Activation& phi, const Matrix& queries,
                       kernels::Exec exec = kernels::Exec::parallel);

  /// Q x k coreset sums.
  Matrix coreset_sums(const Coreset& c) const;
  /// Per-query error averaged over the k weight functions.
  std::vector<double> per_query_error(const Coreset& c) const;
  /// Mean over queries and weight functions of |exact - coreset|.
  double mean_error(const Coreset& c) const;

  const Matrix& exact_sums() const noexcept { return exact_; }  // Q x k

 private:
  Matrix act_;    // n x Q
  Matrix exact_;  // Q x k
  kernels::Exec exec_;
};

double neuron_additive_error(const WeightedSet& ws, const Coreset& coreset, const Activation& phi,
                             const Matrix& queries);

/// Mean over queries of ||pruned(x) - original(x)||_1. Queries are rows of
/// prod(input_shape) values. Throws ShapeMismatch.
double network_l1_error(const Network& original, const Network& pruned, const Matrix& queries);

// ---------------------------------------------------------------- instances

/// Points iid N(0,1), all divided by the largest row norm; weights iid N(0,1).
WeightedSet gaussian_instance(std::size_t n, std::size_t d, std::uint64_t seed,
                              std::size_t k = 1);
/// Points and weights iid U[0,1], points divided by the largest row norm.
WeightedSet uniform_instance(std::size_t n, std::size_t d, std::uint64_t seed,
                             std::size_t k = 1);

struct InstanceConfig {
  enum class Kind { gaussian, uniform, model_layer } kind = Kind::gaussian;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 1;
  std::filesystem::path path;
  std::size_t layer = 0;
};

WeightedSet make_instance(const InstanceConfig& cfg, std::uint64_t seed);

struct QueryConfig {
  enum class Kind { uniform_ball, dataset } kind = Kind::uniform_ball;
  double beta = 1.0;
  std::size_t count = 100;
  std::filesystem::path path;
};

QuerySet make_queries(const QueryConfig& cfg, std::size_t d, std::uint64_t seed);

// ---------------------------------------------------------------- sweeps

struct SweepConfig {
  InstanceConfig instance;
  std::vector<Method> methods;
  std::vector<std::size_t> budgets;
  std::size_t trials = 1;
  QueryConfig queries;
  std::uint64_t master_seed = 0;
  Activation activation = Activation::relu();
  /// Query radius used for sensitivities; defaults to queries.beta.
  std::optional<double> beta;
};

/// Throws ConfigError naming the offending field. Relative paths resolve
/// against base_dir.
SweepConfig parse_sweep_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct SweepRow {
  Method method = Method::coreset;
  std::size_t budget = 0;
  std::size_t trial = 0;
  double mean_abs_err = 0.0;
  double std_abs_err = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ordered by (method, budget, trial)
  std::size_t rescaled_queries = 0;
};

/// Deterministic given master_seed; trials run concurrently.
SweepReport run_sweep(const SweepConfig& cfg);

/// Header `method,budget,trial,mean_abs_err`, numbers with 17 significant digits.
std::string sweep_to_csv(const SweepReport& report);

/// Seed of one (method, budget, trial) cell.
std::uint64_t sweep_trial_seed(std::uint64_t master, Method method, std::size_t budget,
                               std::size_t trial);

// ---------------------------------------------------------------- calibration

struct CalibrationOptions {
  std::size_t seeds = 100;
  std::size_t queries_per_seed = 10;  // seeds * queries_per_seed >= 1000
  std::uint64_t master_seed = 0;
  double floor = 1.0 / 1024.0;
  double tolerance = 0.05;  // relative width of the final bracket
  double max_c = 1048576.0;
  std::uint64_t max_sample_size = 1'000'000'000;
};

struct CalibrationStep {
  double c = 0.0;
  std::uint64_t m = 0;
  double failure_fraction = 0.0;
};

struct CalibrationResult {
  double c = 0.0;
  std::uint64_t m = 0;
  double failure_fraction = 0.0;
  double total_sensitivity = 0.0;
  std::size_t dimension = 0;
  std::size_t trials = 0;
  std::vector<CalibrationStep> path;
};

/// Fraction of (seed, query) trials whose worst-case error over the k weight
/// functions exceeds eps, for coresets of size m. Queries are uniform in the ball.
double failure_fraction(const WeightedSet& ws, const Activation& phi, const QueryBall& ball,
                        double eps, std::uint64_t m, std::size_t seeds,
                        std::size_t queries_per_seed, std::uint64_t master_seed);

/// Smallest c (doubling from `floor`, then bisection) such that m =
/// required_sample_size(t, d, eps, delta, c) fails on at most a delta fraction
/// of trials. Throws NonConvergent past max_c or max_sample_size.
CalibrationResult calibrate_c(double eps, double delta, const WeightedSet& ws,
                              const Activation& phi, const QueryBall& ball,
                              const CalibrationOptions& opts = {});

struct CalibrationConfig {
  InstanceConfig instance;
  Activation activation = Activation::relu();
  double beta = 1.0;
  std::uint64_t instance_seed = 0;
  CalibrationOptions options;
};

CalibrationConfig parse_calibration_config(const nlohmann::json& j,
                                           const std::filesystem::path& base_dir = {});

nlohmann::json calibration_to_json(const CalibrationResult& r, double eps, double delta);

}  // namespace sensprune
