#pragma once

// Sensitivity-sampled coresets for sums of the form
//   sum_j w_i(p_j) * phi(p_j . x + b_j),   ||x|| <= beta,
// with one shared support for all k weight functions.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sensprune/activation.hpp"
#include "sensprune/matrix.hpp"

namespace sensprune {

/// Points p_1..p_n in R^d (rows of `points`) with k weight functions
/// (rows of `weights`, k x n) and optional per-point offsets (biases).
class WeightedSet {
 public:
  /// alpha defaults to max_j ||p_j||; an explicit alpha is checked against
  /// every norm. Throws InvalidParameter / ShapeMismatch.
  WeightedSet(Matrix points, Matrix weights, std::vector<double> offsets = {},
              std::optional<double> alpha = std::nullopt);

  std::size_t n() const noexcept { return points_.rows(); }
  std::size_t d() const noexcept { return points_.cols(); }
  std::size_t k() const noexcept { return weights_.rows(); }

  const Matrix& points() const noexcept { return points_; }
  const Matrix& weights() const noexcept { return weights_; }
  /// Always length n (zeros when none were given).
  std::span<const double> offsets() const noexcept { return offsets_; }
  std::span<const double> norms() const noexcept { return norms_; }
  double norm(std::size_t j) const noexcept { return norms_[j]; }
  double alpha() const noexcept { return alpha_; }

  /// max_i |w_i(p_j)|
  double max_abs_weight(std::size_t j) const noexcept;

 private:
  Matrix points_;
  Matrix weights_;
  std::vector<double> offsets_;
  std::vector<double> norms_;
  double alpha_ = 0.0;
};

struct QueryBall {
  double beta = 1.0;
  std::size_t dim = 0;

  /// Throws InvalidParameter unless beta is finite and positive.
  QueryBall(double beta, std::size_t dim);
};

struct SamplingPlan {
  std::vector<double> probabilities;
  std::vector<double> sensitivities;
  double total_sensitivity = 0.0;
  /// Every contribution vanishes on the ball: any coreset is exact.
  bool exact = false;
};

enum class Method { coreset, uniform, percentile };

std::string_view to_string(Method m) noexcept;
/// Throws InvalidParameter on an unknown name.
Method parse_method(std::string_view name);

/// A reweighted subset: distinct indices (ascending) with multiplicities and
/// one row of new weights per weight function (k x support).
struct Coreset {
  Method method = Method::coreset;
  std::vector<std::size_t> indices;
  std::vector<std::size_t> multiplicities;
  Matrix new_weights;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  SamplingPlan plan;

  std::size_t support_size() const noexcept { return indices.size(); }
};

/// s(p_j) = max_i |w_i(p_j)| * sup |phi| on [b_j - beta||p_j||, b_j + beta||p_j||],
/// pr = s / t. Throws ZeroSensitivity for a degenerate (underflowed) input.
SamplingPlan sampling_plan(const WeightedSet& ws, const Activation& phi, const QueryBall& ball);

/// Uniform plan pr = 1/n; sensitivities are left empty.
SamplingPlan uniform_plan(std::size_t n);

/// m i.i.d. draws from plan.probabilities using the generator seeded by `seed`.
std::vector<std::size_t> draw_indices(const SamplingPlan& plan, std::size_t m,
                                      std::uint64_t seed);

/// Collapses a multiset of draws to distinct indices with
/// u_i(q) = c(q) w_i(q) / (m pr(q)).
Coreset merge_duplicates(std::span<const std::size_t> draws, const WeightedSet& ws,
                         const SamplingPlan& plan, std::size_t m);

/// Single weight function (k = 1).
Coreset coreset_single(const WeightedSet& ws, std::size_t m, const Activation& phi,
                       const QueryBall& ball, std::uint64_t seed);

/// k >= 1 weight functions sharing one support.
Coreset coreset_layer(const WeightedSet& ws, std::size_t m, const Activation& phi,
                      const QueryBall& ball, std::uint64_t seed);

/// ceil((c t / eps^2) (d max(ln t, 0) + ln(1/delta))).
std::uint64_t required_sample_size(double t, std::size_t d, double eps, double delta,
                                   double c = 1.0);

/// The additive error certified at sample size m, i.e. the sample-size bound
/// solved for eps: sqrt(c t (d max(ln t, 0) + ln(1/delta)) / m).
double certified_epsilon(std::size_t m, double t, std::size_t d, double delta, double c = 1.0);

}  // namespace sensprune
