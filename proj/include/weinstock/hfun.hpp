#pragma once

// The auxiliary function h defined through h(s(t)) = 1/|S(t)| with the
// weight s(t) = int_{B(t)} lambda' g / lambda dv.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "weinstock/error.hpp"
#include "weinstock/gfun.hpp"
#include "weinstock/hypgeo.hpp"
#include "weinstock/quadrature.hpp"

namespace weinstock {

/// Tabulated h.  The table holds (s(t_i), t_i) on a log-spaced t grid; a
/// monotone cubic interpolant of log t against log s gives a starting
/// radius that Newton polishes against the exact s(t).  h and h'/h are then
/// evaluated in closed form at that radius,
///   h = 1/|S(t)|,   h'/h = -(n-1)/|B(t)|,
/// so no derivative is ever taken of the table.  Immutable after
/// construction.
class HFunction {
 public:
  explicit HFunction(Dimension dim, double t_max = 60.0, std::size_t count = 4096,
                     double t_min = 1e-4)
      : dim_(dim), g_(dim) {
    if (count < 4 || !(t_min > 0.0) || !(t_max > t_min)) {
      throw DomainError("HFunction: invalid table layout");
    }
    t_.resize(count);
    s_.resize(count);
    const double log_lo = std::log(t_min);
    const double log_hi = std::log(t_max);
    for (std::size_t i = 0; i < count; ++i) {
      t_[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / (count - 1));
    }
    s_[0] = partial_weight(0.0, t_[0]);
    for (std::size_t i = 1; i < count; ++i) {
      s_[i] = s_[i - 1] + partial_weight(t_[i - 1], t_[i]);
      if (!std::isfinite(s_[i])) {
        throw NumericalError("HFunction: weight overflow at t = " + std::to_string(t_[i]));
      }
    }
    build_interpolant();
  }

  const Dimension& dim() const { return dim_; }

  double s_min() const { return s_.front(); }
  double s_max() const { return s_.back(); }
  const std::vector<double>& t_grid() const { return t_; }
  const std::vector<double>& s_grid() const { return s_; }

  bool covers(double s) const { return s >= s_min() && s <= s_max(); }

  /// s(t) = omega int_0^t sinh^{n-2} cosh g dr.
  double weight(double t) const {
    if (!(t >= 0.0)) throw DomainError("HFunction::weight: negative radius");
    if (t <= t_.front()) return partial_weight(0.0, t);
    if (t >= t_.back()) return s_.back() + partial_weight(t_.back(), t);
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    return s_[i] + partial_weight(t_[i], t);
  }

  /// ds/dt = omega sinh^{n-2} cosh g.
  double weight_derivative(double t) const {
    return dim_.omega * hypgeo::sinh_power(t, dim_.n - 2) * std::cosh(t) * g_.value(t);
  }

  /// The radius t with s(t) = s.
  double radius_of(double s) const {
    require_covered(s);
    double t = std::exp((*interp_)(std::log(s)));
    for (int it = 0; it < 8; ++it) {
      const double dt = (weight(t) - s) / weight_derivative(t);
      t -= dt;
      if (std::abs(dt) <= 1e-15 * t) break;
    }
    return t;
  }

  double operator()(double s) const { return 1.0 / hypgeo::sphere_area(dim_, radius_of(s)); }

  /// log h(s), exact at every table node.
  double log_value(double s) const { return -hypgeo::log_sphere_area(dim_, radius_of(s)); }

  /// h'(s)/h(s) = -(n-1)/|B(t(s))|.
  double log_derivative(double s) const {
    return -(dim_.n - 1.0) / hypgeo::ball_volume(dim_, radius_of(s));
  }

  /// A copy whose table reaches at least s (the grid spacing in log t is
  /// kept).
  HFunction extended_to(double s) const {
    if (covers(s)) return *this;
    if (s < s_min()) {
      throw DomainError("HFunction: weight below the tabulated range");
    }
    double t_max = t_.back();
    const double ratio = t_[1] / t_[0];
    std::size_t count = t_.size();
    // the margin keeps s inside the new table despite summation order
    while (weight(t_max) < s * (1 + 1e-9)) t_max *= 1.5;
    count = static_cast<std::size_t>(std::ceil(std::log(t_max / t_.front()) / std::log(ratio))) + 1;
    return HFunction(dim_, t_max, count, t_.front());
  }

 private:
  static constexpr double kShortInterval = 0.02;

  double partial_weight(double a, double b) const {
    if (b <= a) return 0.0;
    // Scale by sinh^{n-1}(b) to keep the integrand O(1).
    const int m = dim_.n - 1;
    const double scale = hypgeo::sinh_power(b, m);
    auto f = [&](double t) {
      if (t == 0.0) return 0.0;
      return hypgeo::sinh_ratio_power(t, b, m) * std::cosh(t) * g_.over_lambda(t);
    };
    double inner = 0.0;
    if (b - a <= kShortInterval * b) {
      // between neighbouring table nodes the integrand is a near-polynomial
      static const quad::Rule rule = quad::gauss_legendre(10);
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t i = 0; i < rule.size(); ++i) inner += rule.weights[i] * f(mid + half * rule.nodes[i]);
      inner *= half;
    } else {
      inner = quad::integrate(f, a, b);
    }
    return dim_.omega * scale * inner;
  }

  void require_covered(double s) const {
    if (!covers(s)) {
      throw DomainError("HFunction: weight " + std::to_string(s) +
                        " outside tabulated range [" + std::to_string(s_min()) + ", " +
                        std::to_string(s_max()) + "]; extend the table");
    }
  }

  void build_interpolant() {
    std::vector<double> x(s_.size());
    std::vector<double> y(t_.size());
    for (std::size_t i = 0; i < s_.size(); ++i) {
      x[i] = std::log(s_[i]);
      y[i] = std::log(t_[i]);
    }
    interp_ = std::make_shared<Interpolant>(std::move(x), std::move(y));
  }

  using Interpolant = boost::math::interpolators::pchip<std::vector<double>>;

  Dimension dim_;
  GFunction g_;
  std::vector<double> t_;
  std::vector<double> s_;
  std::shared_ptr<const Interpolant> interp_;
};

/// Default-layout table per dimension, built once per process.
inline std::shared_ptr<const HFunction> shared_h_function(const Dimension& dim) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const HFunction>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[dim.n];
  if (!slot) slot = std::make_shared<const HFunction>(dim);
  return slot;
}

}  // namespace weinstock
