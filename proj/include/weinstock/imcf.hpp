#pragma once

// Inverse mean curvature flow of axisymmetric radial graphs.  The graph
// r = rho(theta, t) moves with normal speed 1/H, i.e.
//   d rho / dt = sqrt(1 + rho'^2 / lambda^2) / H,
// integrated by classical RK4 on the cosine-series nodes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weinstock/cosine_series.hpp"
#include "weinstock/domain.hpp"
#include "weinstock/error.hpp"
#include "weinstock/gfun.hpp"
#include "weinstock/hfun.hpp"
#include "weinstock/profile_io.hpp"

namespace weinstock {

struct FlowOptions {
  double t_end = 4.0;
  /// Largest step; the stability cap may force smaller ones.
  double dt = 1e-3;
  double sample_dt = 0.05;
  /// Stop early once every principal curvature is within this of 1.
  double kappa_tolerance = 1e-3;
  /// Fraction of the explicit stability limit used.
  double cfl = 0.5;
  bool filter = true;
  /// Before each step the profile is resampled on 2N - 1 nodes (capped at
  /// max_nodes) while its cosine tail exceeds refine_tolerance.
  double refine_tolerance = 1e-9;
  std::size_t max_nodes = 253;
  /// Write profile checkpoints here every checkpoint_dt when non-empty.
  std::string checkpoint_dir;
  double checkpoint_dt = 1.0;
};

struct FlowSample {
  double t = 0.0;
  double area = 0.0;
  double volume = 0.0;
  double weight = 0.0;  // int_Omega lambda' g / lambda dv
  double A = 0.0;
  double min_h = 0.0;
  double kappa_dev = 0.0;
  double min_support = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::vector<double> final_rho;
  int steps = 0;

  /// Largest increase of A between consecutive samples.
  double max_increase() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
      worst = std::max(worst, samples[i].A - samples[i - 1].A);
    }
    return worst;
  }
};

struct FlowState {
  double t = 0.0;
  RadialProfile profile;
};

namespace detail {

inline const CosineSeries::Differentiation& differentiation(std::size_t count) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<CosineSeries::Differentiation>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[count];
  if (!slot) slot = std::make_unique<CosineSeries::Differentiation>(CosineSeries::differentiation(count));
  return *slot;
}

struct NodeGeometry {
  std::vector<SurfacePoint> points;
  double min_h = 0.0;
};

inline NodeGeometry node_geometry(int n, const Eigen::VectorXd& rho) {
  const auto& d = differentiation(static_cast<std::size_t>(rho.size()));
  const Eigen::VectorXd d1 = d.d1 * rho, d1s = d.d1_over_sin * rho, d2 = d.d2 * rho;
  const auto theta = CosineSeries::nodes(static_cast<std::size_t>(rho.size()));
  NodeGeometry out;
  out.points.resize(theta.size());
  out.min_h = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < theta.size(); ++j) {
    CosineSeries::Eval e;
    e.value = rho[j];
    e.d1 = d1[j];
    e.d1_over_sin = d1s[j];
    e.d2 = d2[j];
    out.points[j] = surface_point(n, theta[j], e);
    out.min_h = std::min(out.min_h, out.points[j].mean_curvature);
  }
  return out;
}

inline bool velocity(int n, const Eigen::VectorXd& rho, Eigen::VectorXd& out) {
  if ((rho.array() <= 0.0).any()) return false;
  const NodeGeometry geo = node_geometry(n, rho);
  if (!(geo.min_h > 0.0)) return false;
  out.resize(rho.size());
  for (Eigen::Index j = 0; j < rho.size(); ++j) {
    const SurfacePoint& p = geo.points[j];
    out[j] = 1.0 / (p.support * p.mean_curvature);
  }
  return true;
}

}  // namespace detail

/// Explicit RK4 limit for the linearised flow, which diffuses like
/// (H^2 lambda^2)^{-1} times the Laplacian of S^{n-1}.
inline double stable_dt(const RadialProfile& profile, double cfl = 0.5) {
  Eigen::VectorXd rho = Eigen::Map<const Eigen::VectorXd>(profile.rho().data(), profile.size());
  const auto geo = detail::node_geometry(profile.dim().n, rho);
  const double kmax = static_cast<double>(profile.size() - 1);
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& p : geo.points) {
    const double l = std::sinh(p.rho);
    limit = std::min(limit, 2.78 * p.mean_curvature * p.mean_curvature * l * l /
                                (kmax * (kmax + profile.dim().n - 2)));
  }
  return cfl * limit;
}

/// One RK4 step of size dt; the step is halved (up to ten times) if an
/// intermediate stage loses mean convexity.  Throws if H <= 0 persists.
inline FlowState step(const FlowState& state, double dt, bool filter = true) {
  const int n = state.profile.dim().n;
  const std::size_t count = state.profile.size();
  const Eigen::VectorXd rho = Eigen::Map<const Eigen::VectorXd>(state.profile.rho().data(), count);
  double h = dt;
  for (int attempt = 0; attempt < 10; ++attempt, h *= 0.5) {
    Eigen::VectorXd k1, k2, k3, k4;
    if (!detail::velocity(n, rho, k1)) break;
    if (!detail::velocity(n, rho + 0.5 * h * k1, k2)) continue;
    if (!detail::velocity(n, rho + 0.5 * h * k2, k3)) continue;
    if (!detail::velocity(n, rho + h * k3, k4)) continue;
    Eigen::VectorXd next = rho + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    std::vector<double> values(next.data(), next.data() + next.size());
    if (filter) values = CosineSeries::from_values(values).filtered().sample(state.profile.theta());
    ShapeSpec spec = state.profile.spec();
    return FlowState{state.t + h, RadialProfile(state.profile.dim(), std::move(values), std::move(spec))};
  }
  throw NumericalError("imcf: mean curvature is not positive at t = " + std::to_string(state.t) +
                       "; the flow needs a mean-convex surface");
}

/// The same surface on 2N - 1 nodes; the old nodes are a subset.
inline RadialProfile refined(const RadialProfile& profile) {
  const std::size_t count = 2 * profile.size() - 1;
  ShapeSpec spec = profile.spec();
  return RadialProfile(profile.dim(), profile.series().sample(CosineSeries::nodes(count)),
                       std::move(spec));
}

/// Keeps an h table wide enough for a growing weight.
class HTable {
 public:
  explicit HTable(Dimension dim) : table_(shared_h_function(dim)) {}
  explicit HTable(std::shared_ptr<const HFunction> table) : table_(std::move(table)) {}

  const HFunction& covering(double s) {
    if (!table_->covers(s)) table_ = std::make_shared<HFunction>(table_->extended_to(s));
    return *table_;
  }
  const HFunction& current() const { return *table_; }

 private:
  std::shared_ptr<const HFunction> table_;
};

/// int_Omega lambda' g / lambda dv.  Since lambda^{n-1} g = int_0^r lambda^{n-1},
/// swapping the order of integration along each ray gives
///   int_0^rho lambda' lambda^{n-2} g dr = int_0^rho sinh^{n-1} t ln(sinh rho / sinh t) dt,
/// which needs no evaluations of g.  t = rho u^3 smooths the t^{n-1} ln t end;
/// the point count grows with (n-1) rho, the inverse width of the layer at t = rho.
inline double weight_integral(const RadialProfile& profile, QuadratureSize size = {}) {
  const Dimension& dim = profile.dim();
  const quad::Rule pr = polar_rule(dim, polar_points(profile, size));
  double sum = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double rho = profile.radius(pr.nodes[i]);
    const double log_sinh_rho = hypgeo::log_sinh(rho);
    const int wanted = static_cast<int>(std::ceil(24.0 + 0.5 * (dim.n - 1) * rho));
    const quad::Rule ur = unit_rule(std::max(size.radial, (wanted + 7) / 8 * 8));
    double inner = 0.0;
    for (std::size_t k = 0; k < ur.size(); ++k) {
      const double u = ur.nodes[k];
      const double t = rho * u * u * u;
      inner += ur.weights[k] * 3.0 * u * u * hypgeo::sinh_power(t, dim.n - 1) *
               (log_sinh_rho - hypgeo::log_sinh(t));
    }
    sum += pr.weights[i] * rho * inner;
  }
  return dim.omega_meridian * sum;
}

/// A = (|Sigma|^{-1} int_Sigma g) / (|Omega| h(int_Omega lambda' g / lambda)).
inline FlowSample flow_sample(double t, const RadialProfile& profile, const GFunction& g, HTable& h) {
  FlowSample s;
  s.t = t;
  // N polar by 24 radial points agree with the default 2N by 48 to about 1e-14
  // along flows and cost a quarter as much.
  const QuadratureSize size{static_cast<int>(profile.size()), 24};
  const auto geo = geometry(profile, size);
  s.area = geo.boundary_area;
  s.volume = geo.volume;
  s.weight = weight_integral(profile, size);
  const double mean_g =
      boundary_integral(profile, [&](const SurfacePoint& p) { return g(p.rho); }, size) / s.area;
  s.A = mean_g / (s.volume * h.covering(s.weight)(s.weight));
  s.min_h = geo.min_mean_curvature;
  s.min_support = geo.min_support;
  double dev = 0.0;
  for (const auto& p : geo.nodes) {
    dev = std::max({dev, std::abs(p.kappa_meridian - 1.0), std::abs(p.kappa_rotational - 1.0)});
  }
  s.kappa_dev = dev;
  s.min_rho = profile.min_radius();
  s.max_rho = profile.max_radius();
  return s;
}

inline double monotone_quantity(const RadialProfile& profile, HTable& h) {
  return flow_sample(0.0, profile, GFunction(profile.dim()), h).A;
}

inline FlowTrace run(const RadialProfile& initial, const FlowOptions& options = {},
                     HTable* table = nullptr) {
  const GFunction g(initial.dim());
  HTable local(initial.dim());
  HTable& h = table ? *table : local;
  if (!geometry(initial).mean_convex(0.0)) {
    throw DomainError("imcf: initial surface is not mean convex");
  }
  FlowTrace trace;
  FlowState state{0.0, initial};
  trace.samples.push_back(flow_sample(0.0, initial, g, h));
  double next_sample = options.sample_dt;
  double next_checkpoint = options.checkpoint_dt;
  auto checkpoint = [&](const FlowState& s) {
    if (options.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(options.checkpoint_dir);
    char name[64];
    std::snprintf(name, sizeof name, "/profile_t%07.3f.txt", s.t);
    write_profile(options.checkpoint_dir + name, s.profile, {{"t", std::to_string(s.t)}});
  };
  constexpr double kTimeSlop = 1e-12;
  while (state.t < options.t_end - kTimeSlop) {
    while (state.profile.series().tail() > options.refine_tolerance &&
           2 * state.profile.size() - 1 <= options.max_nodes) {
      state.profile = refined(state.profile);
    }
    double dt = std::min(options.dt, stable_dt(state.profile, options.cfl));
    dt = std::min(dt, next_sample - state.t);
    dt = std::min(dt, options.t_end - state.t);
    state = step(state, dt, options.filter);
    ++trace.steps;
    if (state.t >= next_sample - kTimeSlop || state.t >= options.t_end - kTimeSlop) {
      trace.samples.push_back(flow_sample(state.t, state.profile, g, h));
      next_sample += options.sample_dt;
      if (trace.samples.back().kappa_dev < options.kappa_tolerance) break;
    }
    if (state.t >= next_checkpoint - kTimeSlop) {
      checkpoint(state);
      next_checkpoint += options.checkpoint_dt;
    }
  }
  trace.final_rho = state.profile.rho();
  return trace;
}

struct ImcfInequality {
  double lhs = 0.0;  // int_Sigma g^2 dmu
  double rhs = 0.0;  // |Sigma| |Omega|^2 h(int_Omega lambda' g / lambda)^2
  double slack = 0.0;
};

inline ImcfInequality imcf_inequality(const RadialProfile& profile, HTable& h) {
  const GFunction g(profile.dim());
  const auto geo = geometry(profile);
  ImcfInequality out;
  out.lhs = boundary_integral(profile, [&](const SurfacePoint& p) { const double v = g(p.rho); return v * v; });
  const double s = weight_integral(profile);
  const double hv = h.covering(s)(s);
  out.rhs = geo.boundary_area * geo.volume * geo.volume * hv * hv;
  out.slack = (out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

inline void write_trace_csv(std::ostream& os, const FlowTrace& trace) {
  os << "t,area,volume,A,minH,kappa_dev\n";
  const auto old = os.precision(17);
  for (const auto& s : trace.samples) {
    os << s.t << "," << s.area << "," << s.volume << "," << s.A << "," << s.min_h << ","
       << s.kappa_dev << "\n";
  }
  os.precision(old);
}

}  // namespace weinstock
