#include "sensprune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sensprune/error.hpp"

namespace sensprune {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

DiscreteSampler::DiscreteSampler(std::span<const double> probabilities) {
  if (probabilities.empty()) {
    throw Error(ErrorCode::InvalidParameter, "DiscreteSampler: empty distribution");
  }
  cdf_.resize(probabilities.size());
  double acc = 0.0;
  bool any_positive = false;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    const double p = probabilities[j];
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidParameter,
                  "DiscreteSampler: probabilities must be finite and non-negative");
    }
    acc += p;
    cdf_[j] = acc;
    if (p > 0.0) {
      last_positive_ = j;
      any_positive = true;
    }
  }
  if (!any_positive) {
    throw Error(ErrorCode::InvalidParameter, "DiscreteSampler: all probabilities are zero");
  }
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
  const double target = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(idx, last_positive_);
}

}  // namespace sensprune
