#pragma once

#include <cstdint>

#include "sensprune/coreset.hpp"

namespace sensprune {

/// Same estimator as coreset_layer with pr = 1/n, i.e. u_i(q) += n w_i(q) / m per draw.
Coreset uniform_coreset(const WeightedSet& ws, std::size_t m, std::uint64_t seed);

/// Keeps the m points of largest norm (ties: lower index first) with their
/// original weights. Deterministic and not reweighted, hence biased.
/// Throws InvalidParameter if m is 0 or exceeds n.
Coreset percentile_coreset(const WeightedSet& ws, std::size_t m);

/// Dispatches on method; phi and ball are only used by Method::coreset.
Coreset build_coreset(Method method, const WeightedSet& ws, std::size_t m, const Activation& phi,
                      const QueryBall& ball, std::uint64_t seed);

}  // namespace sensprune
