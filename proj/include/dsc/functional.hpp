#pragma once

#include <dsc/time_signal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace dsc {

/// Constants (a, b, c) claimed to satisfy ||z|| <= a + b * alpha(z)^c.
struct DelimitingConstants {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;

  void validate() const {
    if (!(a >= 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
      throw InvalidInput("delimiting constants need a >= 0, b > 0, c > 0");
  }

  /// a + b * value^c, with 0^c = 0 for every c > 0.
  double envelope(double value) const { return a + b * (value > 0.0 ? std::pow(value, c) : 0.0); }
};

enum class AlphaKind { norm, norm_power, quadratic_form, linear_sum, custom };

inline const char* alpha_kind_name(AlphaKind k) {
  switch (k) {
    case AlphaKind::norm: return "norm";
    case AlphaKind::norm_power: return "norm_power";
    case AlphaKind::quadratic_form: return "quadratic_form";
    case AlphaKind::linear_sum: return "linear_sum";
    case AlphaKind::custom: return "custom";
  }
  return "?";
}

/// Non-negative functional alpha on a state space together with witness
/// constants for the delimiting estimate. The estimate is a claim; use
/// check_delimiting to test it.
template <class Scalar>
class DelimitingFunctional {
 public:
  using Space = StateSpace<Scalar>;
  using Vector = typename Space::Vector;
  using Real = typename Space::Real;
  using RealVector = typename Space::RealVector;
  using Fn = std::function<Real(const Vector&)>;

  /// alpha = ||.||, constants (0, 1, 1).
  static DelimitingFunctional norm(const Space& space) {
    return DelimitingFunctional(AlphaKind::norm, space, [space](const Vector& z) { return space.norm(z); },
                                {0.0, 1.0, 1.0});
  }

  /// alpha = ||.||^p, constants (0, 1, 1/p).
  static DelimitingFunctional norm_power(const Space& space, double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("norm_power: p must be positive");
    DelimitingFunctional f(AlphaKind::norm_power, space,
                           [space, p](const Vector& z) { return Real(std::pow(double(space.norm(z)), p)); },
                           {0.0, 1.0, 1.0 / p});
    f.power_ = p;
    return f;
  }

  /// alpha(z) = sum_i w_i |z_i|^2 with w_i > 0. The witness b is derived for
  /// the space's norm: ||z|| <= b * alpha(z)^(1/2).
  static DelimitingFunctional quadratic_form(const Space& space, RealVector weights) {
    if (weights.size() != space.dim()) throw InvalidInput("quadratic_form: weight count != dimension");
    if ((weights.array() <= Real(0)).any()) throw InvalidInput("quadratic_form: weights must be positive");
    const double wmin = double(weights.minCoeff());
    double b = 1.0;
    switch (space.kind()) {
      case NormKind::l2: b = 1.0 / std::sqrt(wmin); break;
      case NormKind::linf: b = 1.0 / std::sqrt(wmin); break;
      case NormKind::l1: b = std::sqrt(double(space.dim()) / wmin); break;
      case NormKind::weighted_l2:
        b = std::sqrt(double((space.weights().array() / weights.array()).maxCoeff()));
        break;
    }
    DelimitingFunctional f(
        AlphaKind::quadratic_form, space,
        [weights](const Vector& z) { return Real((weights.array() * z.array().abs2()).sum()); }, {0.0, b, 0.5});
    f.weights_ = std::move(weights);
    return f;
  }

  /// alpha(z) = sum_i |z_i|, the linear "total content" functional on the
  /// nonnegative orthant. ||z||_2, ||z||_1 and ||z||_inf are all <= alpha(z).
  static DelimitingFunctional linear_sum(const Space& space) {
    double b = 1.0;
    if (space.kind() == NormKind::weighted_l2) b = std::sqrt(double(space.weights().maxCoeff()));
    return DelimitingFunctional(
        AlphaKind::linear_sum, space, [](const Vector& z) { return Real(z.cwiseAbs().sum()); }, {0.0, b, 1.0});
  }

  static DelimitingFunctional custom(const Space& space, Fn alpha, DelimitingConstants constants,
                                     std::string label = "custom") {
    DelimitingFunctional f(AlphaKind::custom, space, std::move(alpha), constants);
    f.label_ = std::move(label);
    return f;
  }

  Real operator()(const Vector& z) const { return alpha_(z); }

  const Space& space() const { return space_; }
  AlphaKind kind() const { return kind_; }
  const DelimitingConstants& constants() const { return constants_; }
  double power() const { return power_; }
  const RealVector& weights() const { return weights_; }
  const std::string& label() const { return label_; }

  DelimitingFunctional with_constants(DelimitingConstants c) const {
    c.validate();
    DelimitingFunctional f = *this;
    f.constants_ = c;
    return f;
  }

 private:
  DelimitingFunctional(AlphaKind kind, Space space, Fn alpha, DelimitingConstants c)
      : kind_(kind), space_(std::move(space)), alpha_(std::move(alpha)), constants_(c), label_(alpha_kind_name(kind)) {
    constants_.validate();
  }

  AlphaKind kind_;
  Space space_;
  Fn alpha_;
  DelimitingConstants constants_;
  double power_ = 1.0;
  RealVector weights_;
  std::string label_;
};

}  // namespace dsc
