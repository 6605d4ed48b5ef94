#pragma once

// Warped-product primitives of hyperbolic space H^n = [0, inf) x_sinh S^{n-1}:
// the warping function, geodesic balls and spheres, and their inverses.

#include <cmath>
#include <numbers>
#include <string>

#include "weinstock/error.hpp"
#include "weinstock/quadrature.hpp"

namespace weinstock {

/// Area of the unit k-sphere S^k (omega_0 = 2 counts the two points of S^0).
inline double sphere_constant(int k) {
  if (k < 0) throw DomainError("sphere_constant: negative sphere dimension");
  if (k == 0) return 2.0;
  if (k == 1) return 2.0 * std::numbers::pi;
  return 2.0 * std::numbers::pi / (k - 1) * sphere_constant(k - 2);
}

/// Ambient dimension n >= 2 with the two sphere constants used throughout:
/// omega = |S^{n-1}| and omega_meridian = |S^{n-2}| (the rotational factor of
/// an axisymmetric domain).
struct Dimension {
  int n;
  double omega;
  double omega_meridian;

  explicit Dimension(int ambient)
      : n(ambient), omega(0.0), omega_meridian(0.0) {
    if (ambient < 2) {
      throw DomainError("Dimension: ambient dimension must be at least 2, got " +
                        std::to_string(ambient));
    }
    omega = sphere_constant(ambient - 1);
    omega_meridian = sphere_constant(ambient - 2);
  }

  friend bool operator==(const Dimension& a, const Dimension& b) { return a.n == b.n; }
};

namespace hypgeo {

namespace detail {
inline void require_nonnegative(double r, const char* what) {
  if (!(r >= 0.0)) throw DomainError(std::string(what) + ": radius must be non-negative");
}
}  // namespace detail

inline double lambda(double r) {
  detail::require_nonnegative(r, "lambda");
  return std::sinh(r);
}

inline double lambda_prime(double r) {
  detail::require_nonnegative(r, "lambda_prime");
  return std::cosh(r);
}

/// log(sinh r) without overflow for large r.
inline double log_sinh(double r) {
  if (r > 20.0) return r - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * r));
  return std::log(std::sinh(r));
}

/// sinh(r)^m, switching to log space once m * r is large.
inline double sinh_power(double r, int m) {
  if (m == 0) return 1.0;
  if (static_cast<double>(m) * r > 600.0) return std::exp(m * log_sinh(r));
  return std::pow(std::sinh(r), m);
}

/// (sinh t / sinh r)^m for 0 <= t <= r.
inline double sinh_ratio_power(double t, double r, int m) {
  if (r < 300.0) return std::pow(std::sinh(t) / std::sinh(r), m);
  if (t <= 0.0) return 0.0;
  return std::exp(m * (log_sinh(t) - log_sinh(r)));
}

/// The normalized integral  int_0^r (sinh t / sinh r)^m dt.  For m = n - 1 this
/// is the volume-area ratio of the geodesic ball of radius r.
inline double normalized_sinh_integral(int m, double r) {
  detail::require_nonnegative(r, "normalized_sinh_integral");
  if (r == 0.0) return 0.0;
  return quad::integrate([&](double t) { return sinh_ratio_power(t, r, m); }, 0.0, r);
}

/// log |S(r)| = log(omega) + (n - 1) log sinh r.
inline double log_sphere_area(const Dimension& dim, double r) {
  detail::require_nonnegative(r, "log_sphere_area");
  return std::log(dim.omega) + (dim.n - 1) * log_sinh(r);
}

/// |S(r)| = omega_{n-1} sinh^{n-1} r.
inline double sphere_area(const Dimension& dim, double r) {
  detail::require_nonnegative(r, "sphere_area");
  return dim.omega * sinh_power(r, dim.n - 1);
}

/// log |B(r)|.
inline double log_ball_volume(const Dimension& dim, double r) {
  detail::require_nonnegative(r, "log_ball_volume");
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return log_sphere_area(dim, r) + std::log(normalized_sinh_integral(dim.n - 1, r));
}

/// |B(r)| = omega_{n-1} int_0^r sinh^{n-1} t dt.
inline double ball_volume(const Dimension& dim, double r) {
  detail::require_nonnegative(r, "ball_volume");
  if (r == 0.0) return 0.0;
  return sphere_area(dim, r) * normalized_sinh_integral(dim.n - 1, r);
}

/// Geodesic ball of radius r centered at the origin.
struct BallGeometry {
  double radius;
  double volume;
  double area;
};

inline BallGeometry ball(const Dimension& dim, double r) {
  return {r, ball_volume(dim, r), sphere_area(dim, r)};
}

/// Inverse of sphere_area (closed form through arcsinh).
inline double radius_from_area(const Dimension& dim, double area) {
  if (!(area > 0.0)) throw DomainError("radius_from_area: area must be positive");
  const double log_sinh_r = (std::log(area) - std::log(dim.omega)) / (dim.n - 1);
  if (log_sinh_r > 20.0) {
    // sinh r = e^L  =>  r = L + log(1 + sqrt(1 + e^{-2L})).
    return log_sinh_r + std::log1p(std::sqrt(1.0 + std::exp(-2.0 * log_sinh_r)));
  }
  return std::asinh(std::exp(log_sinh_r));
}

/// Inverse of ball_volume: bracket grown geometrically from r = 1, then
/// Newton on log |B(r)| safeguarded by bisection.  d/dr log|B| = 1/g(r).
inline double radius_from_volume(const Dimension& dim, double volume) {
  if (!(volume > 0.0)) throw DomainError("radius_from_volume: volume must be positive");
  const double target = std::log(volume);
  auto residual = [&](double r) { return log_ball_volume(dim, r) - target; };
  double lo = 1.0;
  double hi = 1.0;
  if (residual(1.0) < 0.0) {
    while (residual(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e6) throw NumericalError("radius_from_volume: bracket overflow");
    }
  } else {
    while (residual(lo) > 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw NumericalError("radius_from_volume: bracket underflow");
    }
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = residual(r);
    if (f == 0.0) return r;
    if (f < 0.0) {
      lo = r;
    } else {
      hi = r;
    }
    const double g = normalized_sinh_integral(dim.n - 1, r);
    double next = r - f * g;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-15 * r || hi - lo <= 4e-16 * hi) return next;
    r = next;
  }
  throw NumericalError("radius_from_volume: no convergence");
}

}  // namespace hypgeo
}  // namespace weinstock
