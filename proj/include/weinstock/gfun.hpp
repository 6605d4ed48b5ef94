#pragma once

// The volume-area ratio g(r) = |B(r)| / |S(r)| of geodesic balls, its
// derivatives and the monotone combinations built from it.

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "weinstock/error.hpp"
#include "weinstock/hypgeo.hpp"
#include "weinstock/quadrature.hpp"

namespace weinstock {

/// Exact rational value, used for the closed-form limits of g.
struct Rational {
  std::int64_t num;
  std::int64_t den;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// The three ratios a = lambda' g / lambda, b = lambda lambda' g' / g and
/// c = lambda^2 g' / g, each non-decreasing in r.
struct MonotoneRatios {
  double a;
  double b;
  double c;
};

/// Limits of g at the ends of (0, inf).  The lambda^2 g' limit only exists
/// for n >= 4.
struct GLimits {
  Rational g_over_lambda_at_zero;
  Rational g_at_infinity;
  Rational g_prime_at_zero;
  Rational g_prime_at_infinity;
  std::optional<Rational> lambda2_g_prime_at_infinity;
};

inline GLimits limits(const Dimension& dim) {
  const std::int64_t n = dim.n;
  GLimits out{{1, n}, {1, n - 1}, {1, n}, {0, 1}, std::nullopt};
  if (n >= 4) out.lambda2_g_prime_at_infinity = Rational{1, n - 3};
  return out;
}

/// lim_{r -> inf} lambda^2 g' = 1/(n-3); undefined for n <= 3.
inline Rational lambda2_g_prime_limit(const Dimension& dim) {
  if (dim.n <= 3) {
    throw DomainError("lambda^2 g' has no finite limit for n <= 3");
  }
  return {1, dim.n - 3};
}

/// g, g' and g'' for one ambient dimension.
///
/// g' and g'' come from cancellation-free integral representations,
///   g'  = coth r  int_0^r (sinh t / sinh r)^{n-1} / cosh^2 t dt,
///   g'' = -2(n-1) D(r)/sinh^2 r  int_0^r (sinh t / sinh r)^{n-1} sinh^2 t / D(t)^2 dt,
/// with D = (n-1) sinh^2 + n, so that g' stays accurate where
/// 1 - (n-1) cosh g / sinh loses every digit (large r).
class GFunction {
 public:
  explicit GFunction(Dimension dim) : dim_(dim) {}

  const Dimension& dim() const { return dim_; }

  double value(double r) const {
    check(r);
    if (r < kSeriesRadius) return r / n() - (n() - 1.0) * r * r * r / (3.0 * n() * (n() + 2.0));
    return hypgeo::normalized_sinh_integral(dim_.n - 1, r);
  }

  double operator()(double r) const { return value(r); }

  double prime(double r) const {
    check(r);
    if (r < kSeriesRadius) return 1.0 / n() - (n() - 1.0) * r * r / (n() * (n() + 2.0));
    return gprime_kernel(r) * std::cosh(r) / std::sinh(r);
  }

  double second(double r) const {
    check(r);
    if (r < kSeriesRadius) return -2.0 * (n() - 1.0) * r / (n() * (n() + 2.0));
    const int m = dim_.n - 1;
    auto d_of = [&](double t) {
      const double s = std::sinh(t);
      return (n() - 1.0) * s * s + n();
    };
    const double integral = quad::integrate(
        [&](double t) {
          const double s = std::sinh(t);
          const double d = d_of(t);
          return hypgeo::sinh_ratio_power(t, r, m) * s * s / (d * d);
        },
        0.0, r);
    const double s = std::sinh(r);
    return -2.0 * (n() - 1.0) * d_of(r) / (s * s) * integral;
  }

  /// g / lambda, finite at r = 0 where it equals 1/n.
  double over_lambda(double r) const {
    check(r);
    if (r == 0.0) return 1.0 / n();
    return value(r) / std::sinh(r);
  }

  MonotoneRatios ratios(double r) const {
    check(r);
    if (r == 0.0) return {1.0 / n(), 1.0, 0.0};
    const double g = value(r);
    const double s = std::sinh(r);
    const double c = std::cosh(r);
    if (r < kSeriesRadius) {
      const double gp = prime(r);
      return {c * g / s, s * c * gp / g, s * s * gp / g};
    }
    const double kernel = gprime_kernel(r);  // g' = (c/s) kernel
    return {c * g / s, c * c * kernel / g, s * c * kernel / g};
  }

  /// sigma_1(B(r)) = g'(r) / g(r).
  double sigma1_ball(double r) const {
    if (!(r > 0.0)) throw DomainError("sigma1_ball: radius must be positive");
    return prime(r) / value(r);
  }

  /// sigma_1(B(r)) through the Rayleigh quotient of the test functions
  /// g(r) x_i / r, integrated numerically:
  ///   int_{B(r)} ((g')^2 + (n-1) g^2/lambda^2) dv / (g(r)^2 |S(r)|).
  double sigma1_ball_rayleigh(double r) const {
    if (!(r > 0.0)) throw DomainError("sigma1_ball_rayleigh: radius must be positive");
    const int m = dim_.n - 1;
    const double num = quad::integrate(
        [&](double t) { return energy_density(t) * hypgeo::sinh_ratio_power(t, r, m); }, 0.0, r,
        1e-13);
    const double g = value(r);
    return num / (g * g);
  }

  /// (g')^2 + (n-1) g^2 / lambda^2, the energy density of the coordinate
  /// test functions.
  double energy_density(double r) const {
    const double gp = prime(r);
    const double gl = over_lambda(r);
    return gp * gp + (n() - 1.0) * gl * gl;
  }

  /// The radial function whose decrease drives the transplantation step:
  /// energy_density + (2(n-1)/n) lambda' g / lambda, except for n = 4 where
  /// the coefficient of lambda' g / lambda is 1.
  double transplant_integrand(double r) const {
    const double coefficient = dim_.n == 4 ? 1.0 : 2.0 * (n() - 1.0) / n();
    return energy_density(r) + coefficient * ratios(r).a;
  }

  /// g(1 + g'), the divergence of g^2 d/dr.
  double g_one_plus_gprime(double r) const { return value(r) * (1.0 + prime(r)); }

 private:
  static constexpr double kSeriesRadius = 1e-6;

  double n() const { return static_cast<double>(dim_.n); }

  static void check(double r) {
    if (!(r >= 0.0)) throw DomainError("g: radius must be non-negative");
  }

  // int_0^r (sinh t / sinh r)^{n-1} / cosh^2 t dt
  double gprime_kernel(double r) const {
    const int m = dim_.n - 1;
    return quad::integrate(
        [&](double t) {
          const double c = std::cosh(t);
          return hypgeo::sinh_ratio_power(t, r, m) / (c * c);
        },
        0.0, r);
  }

  Dimension dim_;
};

/// The radius R0 of the three-dimensional gate: the unique R0 > 0 with
/// lambda lambda' g' / g = 5/2 at r = 2 R0.
inline double n3_threshold(const Dimension& dim) {
  if (dim.n != 3) throw DomainError("n3_threshold is defined for n = 3 only");
  const GFunction g(dim);
  auto f = [&](double r) { return g.ratios(r).b - 2.5; };
  double lo = 0.1;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.25 * (bracket.first + bracket.second);
}

inline double n3_threshold() { return n3_threshold(Dimension(3)); }

}  // namespace weinstock
