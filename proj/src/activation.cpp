#include "sensprune/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sensprune/error.hpp"

namespace sensprune {

namespace {

// ln(1 + e^x) without overflow.
double softplus_stable(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// ln(1 + e^a) - ln(1 + e^b) for a >= b, avoiding cancellation of two large
// softplus values.
double softplus_difference(double a, double b) noexcept {
  if (b >= 0.0) {
    return (a - b) + std::log1p(std::exp(-a)) - std::log1p(std::exp(-b));
  }
  return softplus_stable(a) - softplus_stable(b);
}

}  // namespace

Activation Activation::soft_clip(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParameter,
                "soft_clip requires a finite alpha > 0, got " + std::to_string(alpha));
  }
  return Activation(ActivationVariant::soft_clip, alpha);
}

Activation Activation::from_variant(ActivationVariant v) {
  return Activation(v, 1.0);
}

double Activation::eval(double x) const noexcept {
  switch (variant_) {
    case ActivationVariant::relu:
      return x > 0.0 ? x : 0.0;
    case ActivationVariant::sigmoid:
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
    case ActivationVariant::binary_step:
      return x >= 0.0 ? 1.0 : 0.0;
    case ActivationVariant::softplus:
      return softplus_stable(x);
    case ActivationVariant::soft_clip: {
      const double a = alpha_ * x;
      const double v = softplus_difference(a, a - alpha_) / alpha_;
      return v > 0.0 ? v : 0.0;
    }
    case ActivationVariant::gauss: {
      // Saturate instead of overflowing to inf for x < -709.
      const double v = std::exp(-x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    }
  }
  return 0.0;
}

double Activation::sup_abs_on_interval(double lo, double hi) const {
  if (!(lo <= hi)) {
    throw Error(ErrorCode::InvalidParameter, "sup_abs_on_interval: lo must not exceed hi");
  }
  // Monotone, so the extremes sit at the endpoints.
  return std::max(std::abs(eval(lo)), std::abs(eval(hi)));
}

bool Activation::positive_only_on_positive_axis() const noexcept {
  return variant_ == ActivationVariant::relu || variant_ == ActivationVariant::binary_step;
}

std::string_view Activation::name() const noexcept {
  switch (variant_) {
    case ActivationVariant::relu: return "relu";
    case ActivationVariant::sigmoid: return "sigmoid";
    case ActivationVariant::binary_step: return "binary_step";
    case ActivationVariant::softplus: return "softplus";
    case ActivationVariant::soft_clip: return "soft_clip";
    case ActivationVariant::gauss: return "gauss";
  }
  return "relu";
}

std::optional<ActivationVariant> parse_activation_variant(std::string_view name) noexcept {
  if (name == "relu") return ActivationVariant::relu;
  if (name == "sigmoid") return ActivationVariant::sigmoid;
  if (name == "binary_step") return ActivationVariant::binary_step;
  if (name == "softplus") return ActivationVariant::softplus;
  if (name == "soft_clip") return ActivationVariant::soft_clip;
  if (name == "gauss") return ActivationVariant::gauss;
  return std::nullopt;
}

Activation parse_activation(std::string_view text) {
  std::string_view head = text;
  std::string_view param;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    param = text.substr(colon + 1);
  }
  const auto v = parse_activation_variant(head);
  if (!v) {
    throw Error(ErrorCode::InvalidParameter, "unknown activation '" + std::string(text) + "'");
  }
  if (*v == ActivationVariant::soft_clip) {
    if (param.empty()) return Activation::soft_clip(1.0);
    double alpha = 0.0;
    try {
      alpha = std::stod(std::string(param));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidParameter,
                  "bad soft_clip alpha '" + std::string(param) + "'");
    }
    return Activation::soft_clip(alpha);
  }
  if (!param.empty()) {
    throw Error(ErrorCode::InvalidParameter,
                "activation '" + std::string(head) + "' takes no parameter");
  }
  return Activation::from_variant(*v);
}

}  // namespace sensprune
