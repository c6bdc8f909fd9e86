#include "sensprune/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensprune/error.hpp"
#include "sensprune/rng.hpp"

namespace sensprune {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

WeightedSet::WeightedSet(Matrix points, Matrix weights, std::vector<double> offsets,
                         std::optional<double> alpha)
    : points_(std::move(points)), weights_(std::move(weights)), offsets_(std::move(offsets)) {
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw Error(ErrorCode::InvalidParameter, "WeightedSet: need n >= 1 points of dimension >= 1");
  }
  if (weights_.rows() == 0) {
    throw Error(ErrorCode::InvalidParameter, "WeightedSet: need k >= 1 weight functions");
  }
  if (weights_.cols() != points_.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "WeightedSet: weight functions have " + std::to_string(weights_.cols()) +
                    " entries for " + std::to_string(points_.rows()) + " points");
  }
  if (offsets_.empty()) {
    offsets_.assign(points_.rows(), 0.0);
  } else if (offsets_.size() != points_.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "WeightedSet: offsets length differs from n");
  }
  if (!all_finite(points_.data()) || !all_finite(weights_.data()) || !all_finite(offsets_)) {
    throw Error(ErrorCode::InvalidParameter, "WeightedSet: non-finite entry");
  }
  norms_.resize(points_.rows());
  double max_norm = 0.0;
  for (std::size_t j = 0; j < points_.rows(); ++j) {
    norms_[j] = norm2(points_.row(j));
    max_norm = std::max(max_norm, norms_[j]);
  }
  if (alpha) {
    if (!std::isfinite(*alpha) || !(*alpha > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "WeightedSet: alpha must be finite and positive");
    }
    if (max_norm > *alpha * (1.0 + 1e-12)) {
      throw Error(ErrorCode::InvalidParameter,
                  "WeightedSet: a point has norm " + std::to_string(max_norm) +
                      " above alpha = " + std::to_string(*alpha));
    }
    alpha_ = *alpha;
  } else {
    alpha_ = max_norm;
  }
}

double WeightedSet::max_abs_weight(std::size_t j) const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < weights_.rows(); ++i) m = std::max(m, std::abs(weights_(i, j)));
  return m;
}

QueryBall::QueryBall(double b, std::size_t d) : beta(b), dim(d) {
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "QueryBall: beta must be finite and positive");
  }
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::coreset: return "coreset";
    case Method::uniform: return "uniform";
    case Method::percentile: return "percentile";
  }
  return "coreset";
}

Method parse_method(std::string_view name) {
  if (name == "coreset") return Method::coreset;
  if (name == "uniform") return Method::uniform;
  if (name == "percentile") return Method::percentile;
  throw Error(ErrorCode::InvalidParameter,
              "unknown method '" + std::string(name) + "' (expected coreset|uniform|percentile)");
}

SamplingPlan sampling_plan(const WeightedSet& ws, const Activation& phi, const QueryBall& ball) {
  if (ball.dim != 0 && ball.dim != ws.d()) {
    throw Error(ErrorCode::ShapeMismatch, "sampling_plan: query ball dimension " +
                                              std::to_string(ball.dim) + " != point dimension " +
                                              std::to_string(ws.d()));
  }
  const std::size_t n = ws.n();
  SamplingPlan plan;
  plan.sensitivities.resize(n);
  double t = 0.0;
  bool underflow = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double reach = ball.beta * ws.norm(j);
    const double b = ws.offsets()[j];
    const double sup_phi = phi.sup_abs_on_interval(b - reach, b + reach);
    const double w = ws.max_abs_weight(j);
    const double s = w * sup_phi;
    if (s == 0.0 && w != 0.0 && sup_phi != 0.0) underflow = true;
    plan.sensitivities[j] = s;
    t += s;
  }
  if (!std::isfinite(t)) {
    throw Error(ErrorCode::ZeroSensitivity, "sampling_plan: total sensitivity is not finite");
  }
  plan.total_sensitivity = t;
  if (t == 0.0) {
    if (underflow) {
      throw Error(ErrorCode::ZeroSensitivity,
                  "sampling_plan: total sensitivity underflowed to 0 with nonzero contributions");
    }
    plan.probabilities.assign(n, 1.0 / static_cast<double>(n));
    plan.exact = true;
    return plan;
  }
  plan.probabilities.resize(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    plan.probabilities[j] = plan.sensitivities[j] / t;
    sum += plan.probabilities[j];
  }
  for (auto& p : plan.probabilities) p /= sum;
  return plan;
}

SamplingPlan uniform_plan(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "uniform_plan: n must be >= 1");
  SamplingPlan plan;
  plan.probabilities.assign(n, 1.0 / static_cast<double>(n));
  return plan;
}

std::vector<std::size_t> draw_indices(const SamplingPlan& plan, std::size_t m,
                                      std::uint64_t seed) {
  if (m == 0) throw Error(ErrorCode::InvalidParameter, "sample size m must be >= 1");
  const DiscreteSampler sampler(plan.probabilities);
  Rng rng(seed);
  std::vector<std::size_t> draws(m);
  for (auto& d : draws) d = sampler(rng);
  return draws;
}

Coreset merge_duplicates(std::span<const std::size_t> draws, const WeightedSet& ws,
                         const SamplingPlan& plan, std::size_t m) {
  if (draws.empty() || m == 0) {
    throw Error(ErrorCode::InvalidParameter, "merge_duplicates: need at least one draw");
  }
  if (plan.probabilities.size() != ws.n()) {
    throw Error(ErrorCode::ShapeMismatch, "merge_duplicates: plan does not match the set");
  }
  std::vector<std::size_t> counts(ws.n(), 0);
  for (const auto d : draws) {
    if (d >= ws.n()) throw Error(ErrorCode::IndexOutOfRange, "merge_duplicates: bad index");
    ++counts[d];
  }
  Coreset c;
  c.budget = m;
  for (std::size_t j = 0; j < ws.n(); ++j) {
    if (counts[j] > 0) {
      c.indices.push_back(j);
      c.multiplicities.push_back(counts[j]);
    }
  }
  const double md = static_cast<double>(m);
  c.new_weights = Matrix(ws.k(), c.indices.size());
  for (std::size_t s = 0; s < c.indices.size(); ++s) {
    const std::size_t q = c.indices[s];
    const double scale = static_cast<double>(c.multiplicities[s]) / (md * plan.probabilities[q]);
    for (std::size_t i = 0; i < ws.k(); ++i) c.new_weights(i, s) = scale * ws.weights()(i, q);
  }
  c.plan = plan;
  return c;
}

Coreset coreset_layer(const WeightedSet& ws, std::size_t m, const Activation& phi,
                      const QueryBall& ball, std::uint64_t seed) {
  if (m == 0) throw Error(ErrorCode::InvalidParameter, "coreset: sample size m must be >= 1");
  SamplingPlan plan = sampling_plan(ws, phi, ball);
  const auto draws = draw_indices(plan, m, seed);
  Coreset c = merge_duplicates(draws, ws, plan, m);
  c.method = Method::coreset;
  c.seed = seed;
  return c;
}

Coreset coreset_single(const WeightedSet& ws, std::size_t m, const Activation& phi,
                       const QueryBall& ball, std::uint64_t seed) {
  if (ws.k() != 1) {
    throw Error(ErrorCode::InvalidParameter,
                "coreset_single: expected one weight function, got " + std::to_string(ws.k()));
  }
  return coreset_layer(ws, m, phi, ball, seed);
}

std::uint64_t required_sample_size(double t, std::size_t d, double eps, double delta, double c) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "required_sample_size: eps must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "required_sample_size: delta must lie in (0, 1)");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidParameter, "required_sample_size: t must be positive");
  }
  if (d == 0) throw Error(ErrorCode::InvalidParameter, "required_sample_size: d must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::InvalidParameter, "required_sample_size: c must be positive");
  }
  const double complexity =
      static_cast<double>(d) * std::max(std::log(t), 0.0) + std::log(1.0 / delta);
  const double m = std::ceil((c * t / (eps * eps)) * complexity);
  if (m >= 1.8e19) {
    throw Error(ErrorCode::InvalidParameter, "required_sample_size: result does not fit 64 bits");
  }
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

double certified_epsilon(std::size_t m, double t, std::size_t d, double delta, double c) {
  if (m == 0) throw Error(ErrorCode::InvalidParameter, "certified_epsilon: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "certified_epsilon: delta must lie in (0, 1)");
  }
  if (t <= 0.0) return 0.0;
  const double complexity =
      static_cast<double>(d) * std::max(std::log(t), 0.0) + std::log(1.0 / delta);
  return std::sqrt(c * t * complexity / static_cast<double>(m));
}

}  // namespace sensprune
