#pragma once

// Executable form of the multiplicative lower bound: points on the sphere
// {||p|| = alpha, p_d = alpha/2} can each be cut off from all the others by a
// hyperplane through the origin, so for a relu-like phi no proper subset can
// approximate sum_p phi(p . x) within any relative error below 1.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sensprune/activation.hpp"
#include "sensprune/matrix.hpp"

namespace sensprune {

struct SpherePointSet {
  Matrix points;  // n x d
  double alpha = 1.0;
};

/// Throws InvalidParameter unless d >= 3, n >= 2 and alpha > 0.
SpherePointSet build_sphere_points(std::size_t n, std::size_t d, double alpha,
                                   std::uint64_t seed);

/// A vector x with ||x|| = min(beta, 1) / 2, x . p_target > 0 and x . q < 0
/// for every other point. Throws DegenerateSet if the target coincides with
/// another point, IndexOutOfRange for a bad target.
std::vector<double> separating_query(const SpherePointSet& pts, std::size_t target, double beta);

struct ViolationWitness {
  std::size_t omitted = 0;
  std::vector<double> query;
  double full_sum = 0.0;
  double coreset_sum = 0.0;
  double ratio = 0.0;  // |full - coreset| / full
};

/// Evaluates the separating query of the first omitted point against the
/// weighted subset (weights default to 1). Throws InvalidActivation unless
/// phi(b) > 0 exactly for b > 0, InvalidSubset for a full or malformed subset.
ViolationWitness multiplicative_violation(const SpherePointSet& pts,
                                          std::span<const std::size_t> subset,
                                          const Activation& phi, double beta,
                                          std::span<const double> subset_weights = {});

/// Same check for a specific omitted point.
ViolationWitness violation_for(const SpherePointSet& pts, std::span<const std::size_t> subset,
                               std::size_t omitted, const Activation& phi, double beta,
                               std::span<const double> subset_weights = {});

}  // namespace sensprune
