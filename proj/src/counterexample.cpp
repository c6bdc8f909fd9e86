#include "sensprune/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sensprune/error.hpp"
#include "sensprune/rng.hpp"

namespace sensprune {

namespace {

std::span<const double> head(const Matrix& m, std::size_t r) {
  return m.row(r).first(m.cols() - 1);
}

void check_subset(const SpherePointSet& pts, std::span<const std::size_t> subset,
                  std::span<const double> weights) {
  const std::size_t n = pts.points.rows();
  std::vector<bool> seen(n, false);
  for (const auto i : subset) {
    if (i >= n) throw Error(ErrorCode::InvalidSubset, "subset index " + std::to_string(i) + " out of range");
    if (seen[i]) throw Error(ErrorCode::InvalidSubset, "subset index " + std::to_string(i) + " repeated");
    seen[i] = true;
  }
  if (subset.size() == n) {
    throw Error(ErrorCode::InvalidSubset, "subset equals the full set; a proper subset is required");
  }
  if (!weights.empty() && weights.size() != subset.size()) {
    throw Error(ErrorCode::InvalidSubset, "subset weights length differs from subset size");
  }
}

}  // namespace

SpherePointSet build_sphere_points(std::size_t n, std::size_t d, double alpha,
                                   std::uint64_t seed) {
  if (d < 3) throw Error(ErrorCode::InvalidParameter, "build_sphere_points: d must be >= 3");
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "build_sphere_points: n must be >= 2");
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "build_sphere_points: alpha must be positive");
  }
  const double radius = alpha * std::sqrt(3.0) / 2.0;
  Rng rng(seed);
  SpherePointSet out{Matrix(n, d), alpha};
  for (std::size_t j = 0; j < n; ++j) {
    auto row = out.points.row(j);
    for (;;) {
      double len = 0.0;
      for (std::size_t t = 0; t + 1 < d; ++t) {
        row[t] = rng.normal();
        len += row[t] * row[t];
      }
      len = std::sqrt(len);
      if (len < 1e-12) continue;
      for (std::size_t t = 0; t + 1 < d; ++t) row[t] *= radius / len;
      row[d - 1] = alpha / 2.0;
      bool distinct = true;
      for (std::size_t k = 0; k < j && distinct; ++k) {
        distinct = !std::equal(row.begin(), row.end(), out.points.row(k).begin());
      }
      if (distinct) break;
    }
  }
  return out;
}

std::vector<double> separating_query(const SpherePointSet& pts, std::size_t target, double beta) {
  const std::size_t n = pts.points.rows();
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "separating_query: need n >= 2");
  if (target >= n) throw Error(ErrorCode::IndexOutOfRange, "separating_query: bad target index");
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "separating_query: beta must be positive");
  }
  const auto p = head(pts.points, target);
  const double self = dot(p, p);  // 3 alpha^2 / 4 up to rounding
  double g = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < n; ++q) {
    if (q != target) g = std::max(g, dot(p, head(pts.points, q)));
  }
  if (!(g < self)) {
    throw Error(ErrorCode::DegenerateSet,
                "separating_query: point " + std::to_string(target) + " coincides with another");
  }
  // x = (p', -lambda) with lambda * alpha/2 halfway between g and ||p'||^2.
  const double lambda = (g + self) / pts.alpha;
  std::vector<double> x(p.begin(), p.end());
  x.push_back(-lambda);
  const double scale = 0.5 * std::min(beta, 1.0) / norm2(x);
  for (auto& v : x) v *= scale;
  return x;
}

ViolationWitness violation_for(const SpherePointSet& pts, std::span<const std::size_t> subset,
                               std::size_t omitted, const Activation& phi, double beta,
                               std::span<const double> subset_weights) {
  if (!phi.positive_only_on_positive_axis()) {
    throw Error(ErrorCode::InvalidActivation,
                "activation '" + std::string(phi.name()) +
                    "' does not satisfy phi(b) > 0 iff b > 0");
  }
  check_subset(pts, subset, subset_weights);
  if (std::find(subset.begin(), subset.end(), omitted) != subset.end()) {
    throw Error(ErrorCode::InvalidSubset, "point " + std::to_string(omitted) + " is in the subset");
  }
  ViolationWitness w;
  w.omitted = omitted;
  w.query = separating_query(pts, omitted, beta);
  for (std::size_t q = 0; q < pts.points.rows(); ++q) {
    w.full_sum += phi.eval(dot(pts.points.row(q), w.query));
  }
  for (std::size_t s = 0; s < subset.size(); ++s) {
    const double u = subset_weights.empty() ? 1.0 : subset_weights[s];
    w.coreset_sum += u * phi.eval(dot(pts.points.row(subset[s]), w.query));
  }
  w.ratio = std::abs(w.full_sum - w.coreset_sum) / w.full_sum;
  return w;
}

ViolationWitness multiplicative_violation(const SpherePointSet& pts,
                                          std::span<const std::size_t> subset,
                                          const Activation& phi, double beta,
                                          std::span<const double> subset_weights) {
  if (!phi.positive_only_on_positive_axis()) {
    throw Error(ErrorCode::InvalidActivation,
                "activation '" + std::string(phi.name()) +
                    "' does not satisfy phi(b) > 0 iff b > 0");
  }
  check_subset(pts, subset, subset_weights);
  std::vector<bool> in(pts.points.rows(), false);
  for (const auto i : subset) in[i] = true;
  const auto omitted = static_cast<std::size_t>(std::find(in.begin(), in.end(), false) - in.begin());
  return violation_for(pts, subset, omitted, phi, beta, subset_weights);
}

}  // namespace sensprune
