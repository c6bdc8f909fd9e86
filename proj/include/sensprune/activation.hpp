#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sensprune {

enum class ActivationVariant { relu, sigmoid, binary_step, softplus, soft_clip, gauss };

/// One of the supported scalar activations. All map into [0, inf) and are
/// monotone; gauss (e^{-x}) is the only non-increasing one.
class Activation {
 public:
  Activation() = default;

  static Activation relu() { return Activation(ActivationVariant::relu); }
  static Activation sigmoid() { return Activation(ActivationVariant::sigmoid); }
  static Activation binary_step() { return Activation(ActivationVariant::binary_step); }
  static Activation softplus() { return Activation(ActivationVariant::softplus); }
  static Activation gauss() { return Activation(ActivationVariant::gauss); }
  /// Throws InvalidParameter unless alpha > 0 and finite.
  static Activation soft_clip(double alpha);

  /// soft_clip built this way gets alpha = 1.
  static Activation from_variant(ActivationVariant v);

  ActivationVariant variant() const noexcept { return variant_; }
  /// Soft-clip sharpness; 1 for the other variants.
  double alpha() const noexcept { return alpha_; }

  double operator()(double x) const noexcept { return eval(x); }
  double eval(double x) const noexcept;

  /// sup over z in [lo, hi] of |phi(z)|. Requires lo <= hi.
  double sup_abs_on_interval(double lo, double hi) const;

  bool non_decreasing() const noexcept { return variant_ != ActivationVariant::gauss; }
  bool non_negative() const noexcept { return true; }

  /// phi(b) > 0 exactly for b > 0 (relu, binary_step). Needed by the
  /// multiplicative lower-bound construction.
  bool positive_only_on_positive_axis() const noexcept;

  std::string_view name() const noexcept;

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  explicit Activation(ActivationVariant v, double alpha = 1.0) : variant_(v), alpha_(alpha) {}

  ActivationVariant variant_ = ActivationVariant::relu;
  double alpha_ = 1.0;
};

std::optional<ActivationVariant> parse_activation_variant(std::string_view name) noexcept;

/// Parses a CLI-style name; soft_clip accepts "soft_clip" (alpha 1) or
/// "soft_clip:<alpha>".
Activation parse_activation(std::string_view text);

}  // namespace sensprune
