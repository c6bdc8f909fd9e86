#include "sensprune/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sensprune/error.hpp"

namespace sensprune {

Coreset uniform_coreset(const WeightedSet& ws, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw Error(ErrorCode::InvalidParameter, "uniform: sample size m must be >= 1");
  SamplingPlan plan = uniform_plan(ws.n());
  const auto draws = draw_indices(plan, m, seed);
  Coreset c = merge_duplicates(draws, ws, plan, m);
  c.method = Method::uniform;
  c.seed = seed;
  return c;
}

Coreset percentile_coreset(const WeightedSet& ws, std::size_t m) {
  if (m == 0 || m > ws.n()) {
    throw Error(ErrorCode::InvalidParameter, "percentile: budget " + std::to_string(m) +
                                                 " must lie in [1, " + std::to_string(ws.n()) +
                                                 "]");
  }
  std::vector<std::size_t> order(ws.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ws.norm(a) > ws.norm(b); });
  order.resize(m);
  std::sort(order.begin(), order.end());

  Coreset c;
  c.method = Method::percentile;
  c.budget = m;
  c.indices = order;
  c.multiplicities.assign(m, 1);
  c.new_weights = Matrix(ws.k(), m);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t i = 0; i < ws.k(); ++i) c.new_weights(i, s) = ws.weights()(i, order[s]);
  return c;
}

Coreset build_coreset(Method method, const WeightedSet& ws, std::size_t m, const Activation& phi,
                      const QueryBall& ball, std::uint64_t seed) {
  switch (method) {
    case Method::coreset: return coreset_layer(ws, m, phi, ball, seed);
    case Method::uniform: return uniform_coreset(ws, m, seed);
    case Method::percentile: return percentile_coreset(ws, m);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown method");
}

}  // namespace sensprune
