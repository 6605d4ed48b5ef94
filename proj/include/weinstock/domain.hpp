#pragma once

// Axisymmetric star-shaped domains in H^n written as radial graphs
// r = rho(theta) over the polar angle of the symmetry axis.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "weinstock/cosine_series.hpp"
#include "weinstock/error.hpp"
#include "weinstock/hypgeo.hpp"
#include "weinstock/quadrature.hpp"

namespace weinstock {

/// How a profile was produced.  `legendre[k]` multiplies P_k(cos theta).
struct ShapeSpec {
  enum class Kind { sphere, perturbed, translated, nodes };

  Kind kind = Kind::sphere;
  double r0 = 1.0;
  std::vector<double> legendre;
  double shift = 0.0;
  std::vector<double> values;

  static ShapeSpec sphere(double r0) {
    ShapeSpec s;
    s.r0 = r0;
    return s;
  }
  static ShapeSpec perturbed(double r0, std::vector<double> legendre) {
    ShapeSpec s;
    s.kind = Kind::perturbed;
    s.r0 = r0;
    s.legendre = std::move(legendre);
    return s;
  }
  /// The geodesic sphere of radius r0 about the axis point at signed
  /// distance d from the origin (|d| < r0).
  static ShapeSpec translated(double r0, double d) {
    ShapeSpec s;
    s.kind = Kind::translated;
    s.r0 = r0;
    s.shift = d;
    return s;
  }
  static ShapeSpec nodes(std::vector<double> values) {
    ShapeSpec s;
    s.kind = Kind::nodes;
    s.values = std::move(values);
    return s;
  }

  /// One-line form, e.g. "perturbed r0=1 P2=0.2 P4=-0.05".
  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::sphere:
        os << "sphere r0=" << r0;
        break;
      case Kind::perturbed:
        os << "perturbed r0=" << r0;
        for (std::size_t k = 0; k < legendre.size(); ++k) {
          if (legendre[k] != 0.0) os << " P" << k << "=" << legendre[k];
        }
        break;
      case Kind::translated:
        os << "translated r0=" << r0 << " d=" << shift;
        break;
      case Kind::nodes:
        os << "nodes";
        break;
    }
    return os.str();
  }

  static ShapeSpec parse(const std::string& text) {
    std::istringstream is(text);
    std::string word;
    if (!(is >> word)) throw DomainError("shape: empty description");
    ShapeSpec s;
    if (word == "sphere") {
      s.kind = Kind::sphere;
    } else if (word == "perturbed") {
      s.kind = Kind::perturbed;
    } else if (word == "translated") {
      s.kind = Kind::translated;
    } else if (word == "nodes") {
      s.kind = Kind::nodes;
    } else {
      throw DomainError("shape: unknown kind '" + word + "'");
    }
    while (is >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) throw DomainError("shape: expected key=value, got '" + word + "'");
      const std::string key = word.substr(0, eq);
      double value = 0.0;
      try {
        value = std::stod(word.substr(eq + 1));
      } catch (const std::exception&) {
        throw DomainError("shape: bad number in '" + word + "'");
      }
      if (key == "r0") {
        s.r0 = value;
      } else if (key == "d") {
        s.shift = value;
      } else if (key.size() > 1 && key[0] == 'P') {
        const std::size_t k = std::stoul(key.substr(1));
        if (s.legendre.size() <= k) s.legendre.resize(k + 1, 0.0);
        s.legendre[k] = value;
      } else {
        throw DomainError("shape: unknown key '" + key + "'");
      }
    }
    return s;
  }
};

class RadialProfile {
 public:
  /// Relative size of the top quarter of cosine modes above which a node
  /// set is rejected as under-resolved (typically a kink at a pole).
  static constexpr double kResolutionTolerance = 1e-7;

  RadialProfile(Dimension dim, std::vector<double> rho,
                ShapeSpec spec = ShapeSpec::nodes({}))
      : dim_(dim), rho_(std::move(rho)), spec_(std::move(spec)) {
    if (rho_.size() < 5) throw DomainError("RadialProfile: need at least five nodes");
    for (std::size_t j = 0; j < rho_.size(); ++j) {
      if (!(rho_[j] > 0.0) || !std::isfinite(rho_[j])) {
        throw DomainError("RadialProfile: non-positive radius " + std::to_string(rho_[j]) +
                          " at node " + std::to_string(j));
      }
    }
    theta_ = CosineSeries::nodes(rho_.size());
    series_ = CosineSeries::from_values(rho_);
    if (series_.tail() > kResolutionTolerance) {
      throw DomainError("RadialProfile: node values are not smooth at the poles or are "
                        "under-resolved (tail " + std::to_string(series_.tail()) + ")");
    }
    // positivity between nodes
    const std::size_t fine = 4 * rho_.size();
    min_ = max_ = rho_[0];
    for (std::size_t i = 0; i <= fine; ++i) {
      const double v = series_(std::numbers::pi * static_cast<double>(i) / fine);
      min_ = std::min(min_, v);
      max_ = std::max(max_, v);
    }
    if (!(min_ > 0.0)) throw DomainError("RadialProfile: radius crosses zero between nodes");
  }

  const Dimension& dim() const { return dim_; }
  std::size_t size() const { return rho_.size(); }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& rho() const { return rho_; }
  const CosineSeries& series() const { return series_; }
  const ShapeSpec& spec() const { return spec_; }

  double radius(double theta) const { return series_(theta); }
  CosineSeries::Eval eval(double theta) const { return series_.eval(theta); }
  double min_radius() const { return min_; }
  double max_radius() const { return max_; }

 private:
  Dimension dim_;
  std::vector<double> rho_;
  ShapeSpec spec_;
  std::vector<double> theta_;
  CosineSeries series_;
  double min_ = 0.0;
  double max_ = 0.0;
};

inline RadialProfile make_profile(Dimension dim, const ShapeSpec& spec, std::size_t count = 64) {
  if (spec.kind == ShapeSpec::Kind::nodes) return RadialProfile(dim, spec.values, spec);
  if (!(spec.r0 > 0.0)) throw DomainError("make_profile: r0 must be positive");
  const auto theta = CosineSeries::nodes(count);
  std::vector<double> rho(count, spec.r0);
  if (spec.kind == ShapeSpec::Kind::perturbed) {
    for (std::size_t j = 0; j < count; ++j) {
      const double x = std::cos(theta[j]);
      double factor = 1.0;
      for (std::size_t k = 0; k < spec.legendre.size(); ++k) {
        factor += spec.legendre[k] * std::legendre(static_cast<unsigned>(k), x);
      }
      rho[j] = spec.r0 * factor;
    }
  } else if (spec.kind == ShapeSpec::Kind::translated) {
    if (!(std::abs(spec.shift) < spec.r0)) {
      throw DomainError("make_profile: translated sphere must contain the origin");
    }
    const double a = std::cosh(spec.shift);
    for (std::size_t j = 0; j < count; ++j) {
      // cosh r0 = A cosh rho - B sinh rho = sqrt(A^2 - B^2) cosh(rho - phi)
      const double b = std::sinh(spec.shift) * std::cos(theta[j]);
      const double phi = std::atanh(b / a);
      rho[j] = phi + std::acosh(std::cosh(spec.r0) / std::sqrt(a * a - b * b));
    }
  }
  return RadialProfile(dim, std::move(rho), spec);
}

/// Boundary data at one polar angle.
struct SurfacePoint {
  double theta = 0.0;
  double rho = 0.0;
  double rho_theta = 0.0;
  /// dmu / (dtheta dOmega_{n-2}) divided by sin^{n-2} theta:
  /// sqrt(rho'^2 + lambda^2) lambda^{n-2}.
  double area_density = 0.0;
  /// <d_r, nu>
  double support = 0.0;
  double kappa_meridian = 0.0;
  double kappa_rotational = 0.0;
  double mean_curvature = 0.0;
};

/// Boundary data from the local jet of rho at theta.
inline SurfacePoint surface_point(int n, double theta, const CosineSeries::Eval& e) {
  SurfacePoint p;
  p.theta = theta;
  p.rho = e.value;
  p.rho_theta = e.d1;
  const double l = std::sinh(e.value);
  const double lp = std::cosh(e.value);
  const double pp = e.d1;
  const double q = e.d2;
  const double root = std::sqrt(pp * pp + l * l);
  const double w = root / l;
  p.area_density = root * hypgeo::sinh_power(e.value, n - 2);
  p.support = l / root;
  // cot(theta) rho' = cos(theta) (rho'/sin(theta)), regular at the poles
  p.kappa_rotational = (lp / l - std::cos(theta) * e.d1_over_sin / (l * l)) / w;
  p.kappa_meridian = (lp * (l * l + 2 * pp * pp) / l - q) / (l * l * w * w * w);
  p.mean_curvature = p.kappa_meridian + (n - 2) * p.kappa_rotational;
  return p;
}

inline SurfacePoint surface_point(const RadialProfile& profile, double theta) {
  return surface_point(profile.dim().n, theta, profile.eval(theta));
}

namespace detail {

struct RuleCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, quad::Rule> theta;  // (n, q) -> rule in theta
  std::map<int, quad::Rule> radial;
};

inline RuleCache& rule_cache() {
  static RuleCache cache;
  return cache;
}

}  // namespace detail

/// Rule for int_0^pi f(theta) sin^{n-2}(theta) dtheta: Gauss-Jacobi in
/// x = cos(theta) with weight (1 - x^2)^{(n-3)/2}.  Nodes are returned as
/// ascending angles.
inline quad::Rule polar_rule(const Dimension& dim, int q) {
  auto& cache = detail::rule_cache();
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto key = std::make_pair(dim.n, q);
  auto it = cache.theta.find(key);
  if (it != cache.theta.end()) return it->second;
  quad::Rule x = quad::gauss_jacobi(q, 0.5 * (dim.n - 3));
  quad::Rule rule;
  for (std::size_t i = x.size(); i-- > 0;) {
    rule.nodes.push_back(std::acos(x.nodes[i]));
    rule.weights.push_back(x.weights[i]);
  }
  return cache.theta.emplace(key, std::move(rule)).first->second;
}

/// Gauss-Legendre on [0, 1].
inline quad::Rule unit_rule(int q) {
  auto& cache = detail::rule_cache();
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto it = cache.radial.find(q);
  if (it != cache.radial.end()) return it->second;
  return cache.radial.emplace(q, quad::gauss_legendre(q, 0.0, 1.0)).first->second;
}

struct QuadratureSize {
  int polar = 0;   // 0 means 2 N
  int radial = 48;
};

inline int polar_points(const RadialProfile& profile, const QuadratureSize& size) {
  return size.polar > 0 ? size.polar : static_cast<int>(2 * profile.size());
}

/// int_Sigma phi dmu, phi evaluated on SurfacePoint.
template <class Phi>
double boundary_integral(const RadialProfile& profile, Phi&& phi, QuadratureSize size = {}) {
  const Dimension& dim = profile.dim();
  const quad::Rule rule = polar_rule(dim, polar_points(profile, size));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const SurfacePoint p = surface_point(profile, rule.nodes[i]);
    const double v = phi(p);
    if (!std::isfinite(v)) {
      throw NumericalError("boundary_integral: non-finite integrand at theta = " +
                           std::to_string(p.theta));
    }
    sum += rule.weights[i] * p.area_density * v;
  }
  return dim.omega_meridian * sum;
}

/// int_Omega f(r, theta) dv over the meridian region 0 <= r <= rho(theta).
template <class F>
double bulk_integral_polar(const RadialProfile& profile, F&& f, QuadratureSize size = {}) {
  const Dimension& dim = profile.dim();
  const quad::Rule pr = polar_rule(dim, polar_points(profile, size));
  const quad::Rule sr = unit_rule(size.radial);
  double sum = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double rho = profile.radius(pr.nodes[i]);
    double inner = 0.0;
    for (std::size_t k = 0; k < sr.size(); ++k) {
      const double r = sr.nodes[k] * rho;
      const double v = f(r, pr.nodes[i]);
      if (!std::isfinite(v)) {
        throw NumericalError("bulk_integral: non-finite integrand at r = " + std::to_string(r) +
                             ", theta = " + std::to_string(pr.nodes[i]));
      }
      inner += sr.weights[k] * v * hypgeo::sinh_power(r, dim.n - 1);
    }
    sum += pr.weights[i] * rho * inner;
  }
  return dim.omega_meridian * sum;
}

/// int_Omega f(r) dv for a radial function f.
template <class F>
double bulk_integral(const RadialProfile& profile, F&& f, QuadratureSize size = {}) {
  return bulk_integral_polar(profile, [&](double r, double) { return f(r); }, size);
}

struct DomainGeometry {
  double boundary_area = 0.0;
  double volume = 0.0;
  /// |B(volume_radius)| = |Omega|
  double volume_radius = 0.0;
  /// |S(area_radius)| = |Sigma|
  double area_radius = 0.0;
  std::vector<SurfacePoint> nodes;
  double min_mean_curvature = 0.0;
  double max_mean_curvature = 0.0;
  double min_support = 0.0;

  bool mean_convex(double margin = 1e-8) const { return min_mean_curvature > margin; }
};

inline DomainGeometry geometry(const RadialProfile& profile, QuadratureSize size = {}) {
  const Dimension& dim = profile.dim();
  DomainGeometry geo;
  geo.boundary_area = boundary_integral(profile, [](const SurfacePoint&) { return 1.0; }, size);
  // the radial integral of sinh^{n-1} is done exactly, leaving one polar sum
  const quad::Rule pr = polar_rule(dim, polar_points(profile, size));
  double sum = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    sum += pr.weights[i] * hypgeo::ball_volume(dim, profile.radius(pr.nodes[i]));
  }
  geo.volume = sum * dim.omega_meridian / dim.omega;
  geo.volume_radius = hypgeo::radius_from_volume(dim, geo.volume);
  geo.area_radius = hypgeo::radius_from_area(dim, geo.boundary_area);

  // curvature extrema over nodes and a 4x refinement between them
  const std::size_t fine = 4 * (profile.size() - 1);
  geo.min_mean_curvature = std::numeric_limits<double>::infinity();
  geo.max_mean_curvature = -std::numeric_limits<double>::infinity();
  geo.min_support = 1.0;
  for (std::size_t i = 0; i <= fine; ++i) {
    const SurfacePoint p = surface_point(profile, std::numbers::pi * static_cast<double>(i) / fine);
    geo.min_mean_curvature = std::min(geo.min_mean_curvature, p.mean_curvature);
    geo.max_mean_curvature = std::max(geo.max_mean_curvature, p.mean_curvature);
    geo.min_support = std::min(geo.min_support, p.support);
    if (i % 4 == 0) geo.nodes.push_back(p);
  }
  return geo;
}

inline double support(const RadialProfile& profile, double theta) {
  return surface_point(profile, theta).support;
}

/// Polar coordinates (r, theta) about the axis point at signed distance d of
/// the point (rho, theta).  Works in the hyperboloid model, where the point
/// is (cosh rho, sinh rho cos theta, sinh rho sin theta) and moving the
/// centre is a boost along the axis.
inline std::pair<double, double> polar_about(double rho, double theta, double d) {
  const double c = std::cosh(rho), s = std::sinh(rho);
  const double y1 = -std::sinh(d) * c + std::cosh(d) * s * std::cos(theta);
  const double y2 = s * std::sin(theta);
  const double perp = std::hypot(y1, y2);
  return {std::asinh(perp), std::atan2(y2, y1)};
}

/// int_Sigma G(r_p) x_axis dmu with x_axis = r_p cos(theta_p) the axial
/// normal coordinate about the axis point at distance d.
template <class G>
double axial_moment(const RadialProfile& profile, G&& weight, double d, QuadratureSize size = {}) {
  return boundary_integral(
      profile,
      [&](const SurfacePoint& p) {
        const auto [r, th] = polar_about(p.rho, p.theta, d);
        if (r == 0.0) return 0.0;
        return weight(r) * r * std::cos(th);
      },
      size);
}

struct Recentered {
  RadialProfile profile;
  double shift = 0.0;
  /// Axial moment of the new profile about its own origin.
  double moment = 0.0;
  /// The moment divided by int_Sigma G(r) r dmu.
  double normalized_moment = 0.0;
};

/// Moves the origin to the axis point where the axial moment vanishes and
/// re-samples rho about it on the same node count.
template <class G>
Recentered recenter(const RadialProfile& profile, G&& weight, QuadratureSize size = {}) {
  const double top = profile.radius(0.0);
  const double bottom = profile.radius(std::numbers::pi);
  auto moment = [&](double d) { return axial_moment(profile, weight, d, size); };
  const double scale = boundary_integral(
      profile, [&](const SurfacePoint& p) { return weight(p.rho) * p.rho; }, size);

  double shift = 0.0;
  const double m0 = moment(0.0);
  if (std::abs(m0) > 1e-15 * scale) {
    double lo = -bottom * (1 - 1e-9), hi = top * (1 - 1e-9);
    double flo = moment(lo), fhi = moment(hi);
    if (!(flo > 0.0 && fhi < 0.0)) {
      throw NumericalError("recenter: moment root not bracketed on the axis");
    }
    boost::uintmax_t iterations = 200;
    const auto root = boost::math::tools::toms748_solve(
        moment, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iterations);
    shift = 0.5 * (root.first + root.second);
  }

  std::vector<double> rho(profile.size());
  const auto& targets = profile.theta();
  rho.front() = top - shift;
  rho.back() = bottom + shift;
  auto angle = [&](double theta) { return polar_about(profile.radius(theta), theta, shift).second; };
  for (std::size_t j = 1; j + 1 < rho.size(); ++j) {
    const double want = targets[j];
    auto f = [&](double theta) { return angle(theta) - want; };
    double a = 0.0, b = std::numbers::pi;
    double fa = -want, fb = std::numbers::pi - want;
    boost::uintmax_t iterations = 200;
    const auto root = boost::math::tools::toms748_solve(
        f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iterations);
    const double theta = 0.5 * (root.first + root.second);
    rho[j] = polar_about(profile.radius(theta), theta, shift).first;
  }
  ShapeSpec spec = profile.spec();
  spec.kind = ShapeSpec::Kind::nodes;
  spec.values = rho;
  RadialProfile moved(profile.dim(), std::move(rho), std::move(spec));
  const double m = axial_moment(moved, weight, 0.0, size);
  const double moved_scale = boundary_integral(
      moved, [&](const SurfacePoint& p) { return weight(p.rho) * p.rho; }, size);
  return Recentered{std::move(moved), shift, m, m / moved_scale};
}

/// Radius of the smallest geodesic ball containing the domain.  The ball is
/// unique, hence centred on the axis.
inline double circumscribed_radius(const RadialProfile& profile) {
  const std::size_t fine = 8 * profile.size();
  std::vector<double> rho(fine + 1), theta(fine + 1);
  for (std::size_t i = 0; i <= fine; ++i) {
    theta[i] = std::numbers::pi * static_cast<double>(i) / fine;
    rho[i] = profile.radius(theta[i]);
  }
  auto farthest = [&](double d) {
    // cosh dist = cosh rho cosh d - sinh rho sinh d cos theta
    std::size_t best = 0;
    double best_value = -1.0;
    auto distance = [&](double th) {
      const double r = profile.radius(th);
      return std::acosh(std::max(
          1.0, std::cosh(r) * std::cosh(d) - std::sinh(r) * std::sinh(d) * std::cos(th)));
    };
    for (std::size_t i = 0; i <= fine; ++i) {
      const double v = distance(theta[i]);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    const double lo = theta[best == 0 ? 0 : best - 1];
    const double hi = theta[std::min(best + 1, fine)];
    const auto refined = boost::math::tools::brent_find_minima(
        [&](double th) { return -distance(th); }, lo, hi, 40);
    return std::max(best_value, -refined.second);
  };
  const auto best = boost::math::tools::brent_find_minima(farthest, -profile.radius(std::numbers::pi),
                                                          profile.radius(0.0), 40);
  return best.second;
}

enum class Monotonicity { increasing, decreasing };

struct TransplantResult {
  double domain_integral = 0.0;
  double ball_integral = 0.0;
  double radius = 0.0;
  /// Relative margin by which the expected inequality holds (negative if it
  /// fails).
  double slack = 0.0;
};

/// Compares int_Omega f dv with int_{B(R)} f dv, |B(R)| = |Omega|.  For
/// decreasing f the ball wins; for increasing f the domain does.
template <class F>
TransplantResult mass_transplant_check(const RadialProfile& profile, F&& f, Monotonicity direction,
                                       QuadratureSize size = {}) {
  const Dimension& dim = profile.dim();
  const DomainGeometry geo = geometry(profile, size);
  const double hi = std::max(profile.max_radius(), geo.volume_radius);
  constexpr int kGrid = 2000;
  double prev = f(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = f(hi * i / kGrid);
    const double step = direction == Monotonicity::increasing ? v - prev : prev - v;
    if (step < -1e-12 * std::max(std::abs(v), std::abs(prev))) {
      throw DomainError("mass_transplant_check: f is not monotone in the declared direction");
    }
    prev = v;
  }
  TransplantResult out;
  out.radius = geo.volume_radius;
  out.domain_integral = bulk_integral(profile, f, size);
  out.ball_integral =
      dim.omega * quad::integrate(
                      [&](double r) { return f(r) * hypgeo::sinh_power(r, dim.n - 1); }, 0.0,
                      geo.volume_radius, 1e-15);
  const double scale = std::max({std::abs(out.domain_integral), std::abs(out.ball_integral), 1e-300});
  const double diff = direction == Monotonicity::decreasing
                          ? out.ball_integral - out.domain_integral
                          : out.domain_integral - out.ball_integral;
  out.slack = diff / scale;
  return out;
}

/// Divergence of the vector field F = F_r d_r + F_theta e_theta (e_theta the
/// unit polar direction) at (r, theta), by centred differences of the flux
/// densities lambda^{n-1} sin^{n-2} F_r and lambda^{n-2} sin^{n-2} F_theta.
/// Steps are `rel_step` times the local length scale of those densities.
template <class Field>
double flux_divergence(const Dimension& dim, Field&& field, double r, double theta,
                       double rel_step = 1e-4) {
  const int n = dim.n;
  const double hr = rel_step * std::min(r, 1.0 / std::max(1, n - 1));
  const double ht = rel_step * std::min(std::sin(theta), 1.0);
  auto density_r = [&](double rr) {
    return hypgeo::sinh_power(rr, n - 1) * std::pow(std::sin(theta), n - 2) *
           field(rr, theta).first;
  };
  auto density_t = [&](double th) {
    return hypgeo::sinh_power(r, n - 2) * std::pow(std::sin(th), n - 2) * field(r, th).second;
  };
  const double volume = hypgeo::sinh_power(r, n - 1) * std::pow(std::sin(theta), n - 2);
  const double dr = (density_r(r + hr) - density_r(r - hr)) / (2 * hr);
  const double dt = (density_t(theta + ht) - density_t(theta - ht)) / (2 * ht);
  return (dr + dt) / volume;
}

}  // namespace weinstock
