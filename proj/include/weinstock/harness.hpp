#pragma once

// Verification cases, report rows and the suites that fill them.
//
// Every row states one inequality lhs REL rhs.  `slack` is the margin by
// which it holds, normalised by a scale recorded per row (by default the
// larger of |lhs| and |rhs|), and a row passes iff slack >= -tolerance.
// A negative tolerance therefore demands strictness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "weinstock/domain.hpp"
#include "weinstock/error.hpp"
#include "weinstock/gfun.hpp"
#include "weinstock/hfun.hpp"
#include "weinstock/hypgeo.hpp"
#include "weinstock/imcf.hpp"
#include "weinstock/profile_io.hpp"
#include "weinstock/steklov.hpp"

namespace weinstock::harness {

struct Tolerances {
  double analytic = 1e-8;
  double quadrature = 1e-7;
  double fem = 1e-3;
  double flow = 1e-7;
  /// Mass transplantation: strict margin on non-balls, equality on balls.
  double transplant = 1e-9;
  /// The corollary's intermediate Rayleigh-sum inequality.
  double corollary_intermediate = 1e-6;
  double flow_limit = 1e-3;
  double flow_area = 1e-5;
  double flow_sphere = 1e-6;
};

enum class Check { weinstock, lemma_chain, corollary, transplant, flow };

inline const std::vector<std::pair<Check, std::string>>& check_names() {
  static const std::vector<std::pair<Check, std::string>> names = {
      {Check::weinstock, "weinstock"},   {Check::lemma_chain, "lemma_chain"},
      {Check::corollary, "corollary"},   {Check::transplant, "transplant"},
      {Check::flow, "flow"}};
  return names;
}

inline std::string to_string(Check c) {
  for (const auto& [k, name] : check_names()) {
    if (k == c) return name;
  }
  return "?";
}

inline Check parse_check(const std::string& text) {
  for (const auto& [k, name] : check_names()) {
    if (name == text || (name == "lemma_chain" && text == "lemma-chain")) return k;
  }
  throw DomainError("unknown check '" + text + "'");
}

/// The statement each check verifies, carried into every report row.
inline std::string default_anchor(Check c) {
  switch (c) {
    case Check::weinstock:
      return "Weinstock inequality: sigma1(Omega) <= sigma1(Omega*) for the ball with |dOmega*| = |dOmega|";
    case Check::lemma_chain:
      return "scaled comparison with the equal-volume ball: |Sigma|^q sigma1(Omega) <= |S(R)|^q sigma1(B(R))";
    case Check::corollary:
      return "sum_{i<n} 1/sigma_i(Omega) >= sum_{i<n} 1/sigma_i(Omega*)";
    case Check::transplant:
      return "mass transplantation: monotone radial f compared over Omega and B(R), |B(R)| = |Omega|";
    case Check::flow:
      return "inverse mean curvature flow: A(t) non-increasing with A(t) -> 1";
  }
  return {};
}

struct VerificationCase {
  std::string id;
  int n = 4;
  ShapeSpec shape = ShapeSpec::sphere(1.0);
  std::size_t nodes = 64;
  std::set<Check> checks;
  std::map<Check, std::string> anchors;
  Tolerances tol;
  SteklovOptions fem;
  FlowOptions flow;
  /// Solve sector 2 as well and check it stays above sigma_1.
  bool sector_cross_check = false;
  /// For n = 3, require circumscribed radius <= R0.
  bool n3_gate = true;

  bool enabled(Check c) const { return checks.count(c) > 0; }
  void enable(Check c) {
    checks.insert(c);
    if (!anchors.count(c)) anchors[c] = default_anchor(c);
  }
};

struct Row {
  std::string case_id;
  std::string check;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string anchor;
  std::string note;
};

/// lhs <= rhs with slack (rhs - lhs) / scale.
inline Row leq(std::string check, std::string anchor, double lhs, double rhs, double tolerance,
               double scale = 0.0) {
  if (!(scale > 0.0)) scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  Row r;
  r.check = std::move(check);
  r.anchor = std::move(anchor);
  r.relation = "<=";
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = (rhs - lhs) / scale;
  r.tolerance = tolerance;
  r.pass = std::isfinite(r.slack) && r.slack >= -tolerance;
  return r;
}

inline Row geq(std::string check, std::string anchor, double lhs, double rhs, double tolerance,
               double scale = 0.0) {
  Row r = leq(std::move(check), std::move(anchor), rhs, lhs, tolerance, scale);
  std::swap(r.lhs, r.rhs);
  r.relation = ">=";
  return r;
}

/// lhs = rhs with slack -|lhs - rhs| / scale.
inline Row equal(std::string check, std::string anchor, double lhs, double rhs, double tolerance,
                 double scale = 0.0) {
  Row r = leq(std::move(check), std::move(anchor), lhs, rhs, tolerance, scale);
  const double s = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  r.slack = -std::abs(lhs - rhs) / (scale > 0.0 ? scale : s);
  r.relation = "=";
  r.pass = std::isfinite(r.slack) && r.slack >= -tolerance;
  return r;
}

/// An error quantity that must not exceed the tolerance.
inline Row bounded(std::string check, std::string anchor, double error, double tolerance) {
  Row r = leq(std::move(check), std::move(anchor), error, 0.0, tolerance, 1.0);
  r.relation = "err<=";
  return r;
}

inline Row failure(std::string check, std::string anchor, const std::string& what) {
  Row r;
  r.check = std::move(check);
  r.anchor = std::move(anchor);
  r.relation = "error";
  r.lhs = r.rhs = r.slack = std::numeric_limits<double>::quiet_NaN();
  r.pass = false;
  r.note = what;
  return r;
}

struct Report {
  std::string name;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;
  std::vector<Row> rows;
  std::size_t cases = 0;

  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.pass; }));
  }
  std::size_t failed() const { return rows.size() - passed(); }
  bool ok() const { return failed() == 0; }

  void append(const Report& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    cases += other.cases;
  }

  std::vector<Row> select(const std::string& check) const {
    std::vector<Row> out;
    for (const auto& r : rows) {
      if (r.check == check) out.push_back(r);
    }
    return out;
  }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline nlohmann::json row_json(const Row& r) {
  return {{"case", r.case_id},     {"check", r.check},          {"relation", r.relation},
          {"lhs", number(r.lhs)},  {"rhs", number(r.rhs)},      {"slack", number(r.slack)},
          {"tolerance", r.tolerance}, {"pass", r.pass},         {"anchor", r.anchor},
          {"note", r.note}};
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Report& report) {
  os << "# report = " << report.name << "\n# seed = " << report.seed << "\n";
  for (const auto& [k, v] : report.meta) os << "# " << k << " = " << v << "\n";
  os << "case,check,relation,lhs,rhs,slack,tolerance,pass,anchor,note\n";
  const auto old = os.precision(17);
  for (const auto& r : report.rows) {
    os << detail::csv_field(r.case_id) << "," << detail::csv_field(r.check) << "," << r.relation
       << "," << r.lhs << "," << r.rhs << "," << r.slack << "," << r.tolerance << ","
       << (r.pass ? "pass" : "FAIL") << "," << detail::csv_field(r.anchor) << ","
       << detail::csv_field(r.note) << "\n";
  }
  os.precision(old);
}

inline nlohmann::json summary_json(const Report& report) {
  nlohmann::json j;
  j["report"] = report.name;
  j["seed"] = report.seed;
  j["generator"] = "mt19937_64";
  j["meta"] = report.meta;
  j["cases"] = report.cases;
  j["rows"] = report.rows.size();
  j["passed"] = report.passed();
  j["failed"] = report.failed();
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_check;
  std::map<std::string, double> worst;
  for (const auto& r : report.rows) {
    auto& c = by_check[r.check];
    ++c.first;
    if (!r.pass) ++c.second;
    if (std::isfinite(r.slack)) {
      auto it = worst.find(r.check);
      if (it == worst.end() || r.slack < it->second) worst[r.check] = r.slack;
    }
  }
  for (const auto& [name, counts] : by_check) {
    j["checks"][name] = {{"rows", counts.first},
                         {"failed", counts.second},
                         {"min_slack", worst.count(name) ? detail::number(worst[name]) : nullptr}};
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    if (!r.pass) j["failures"].push_back(detail::row_json(r));
  }
  return j;
}

/// Writes <prefix>.csv and <prefix>.json.
inline void write_report(const std::string& prefix, const Report& report) {
  const std::filesystem::path base(prefix);
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  {
    std::ofstream os(prefix + ".csv");
    if (!os) throw std::runtime_error("cannot write " + prefix + ".csv");
    write_csv(os, report);
  }
  std::ofstream os(prefix + ".json");
  if (!os) throw std::runtime_error("cannot write " + prefix + ".json");
  os << summary_json(report).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Per-case evaluation

class CaseContext {
 public:
  explicit CaseContext(VerificationCase c) : case_(std::move(c)), dim_(case_.n), g_(dim_) {}

  const VerificationCase& spec() const { return case_; }
  const Dimension& dim() const { return dim_; }
  const GFunction& g() const { return g_; }

  const RadialProfile& profile() {
    if (!profile_) profile_.emplace(make_profile(dim_, case_.shape, case_.nodes));
    return *profile_;
  }

  const DomainGeometry& geo() {
    if (!geo_) {
      geo_ = geometry(profile());
      if (!geo_->mean_convex()) {
        throw DomainError("profile is not mean convex (min H = " +
                          std::to_string(geo_->min_mean_curvature) + ")");
      }
    }
    return *geo_;
  }

  /// The profile about its centre of mass for the weight g(t)/t, which makes
  /// the test functions g(r) x_i / r orthogonal to constants on Sigma.
  const Recentered& centered() {
    if (!centered_) {
      geo();
      centered_.emplace(recenter(profile(), [this](double t) { return t > 0.0 ? g_(t) / t : 1.0 / dim_.n; }));
    }
    return *centered_;
  }

  const TestFunctionBound& terms() {
    if (!terms_) terms_ = test_function_terms(centered().profile);
    return *terms_;
  }

  const SteklovSpectrum& spectrum() {
    if (!spectrum_) {
      geo();
      std::vector<int> sectors{0, 1};
      if (case_.sector_cross_check || case_.enabled(Check::corollary)) sectors.push_back(2);
      spectrum_ = solve(profile(), sectors, case_.fem);
    }
    return *spectrum_;
  }

  HTable& h() {
    if (!h_) h_.emplace(dim_);
    return *h_;
  }

  bool is_ball() {
    if (case_.shape.kind == ShapeSpec::Kind::sphere) return true;
    const auto& p = profile();
    return p.max_radius() - p.min_radius() <= 1e-12 * p.max_radius();
  }

  bool centred_ball() { return is_ball() && case_.shape.kind != ShapeSpec::Kind::translated; }

 private:
  VerificationCase case_;
  Dimension dim_;
  GFunction g_;
  std::optional<RadialProfile> profile_;
  std::optional<DomainGeometry> geo_;
  std::optional<Recentered> centered_;
  std::optional<TestFunctionBound> terms_;
  std::optional<SteklovSpectrum> spectrum_;
  std::optional<HTable> h_;
};

inline std::vector<Row> weinstock_check(CaseContext& ctx) {
  const auto& c = ctx.spec();
  const Tolerances& tol = c.tol;
  const std::string anchor = c.anchors.count(Check::weinstock) ? c.anchors.at(Check::weinstock)
                                                              : default_anchor(Check::weinstock);
  std::vector<Row> rows;
  if (ctx.dim().n < 3) throw DomainError("weinstock check needs n >= 3");
  if (ctx.dim().n == 3 && c.n3_gate) {
    rows.push_back(leq("n3-gate", "n = 3 requires circumscribed radius <= R0, b(2 R0) = 5/2",
                       circumscribed_radius(ctx.profile()), n3_threshold(), 0.0));
  }
  const double sigma = ctx.spectrum().sigma1();
  const double star = sigma1_exact_ball(ctx.dim(), ctx.geo().area_radius);
  Row r = leq("weinstock", anchor, sigma / star, 1.0, tol.fem, 1.0);
  std::ostringstream note;
  note.precision(12);
  note << "sigma1=" << sigma << " sigma1*=" << star;
  r.note = note.str();
  rows.push_back(r);
  if (ctx.is_ball()) {
    rows.push_back(equal("weinstock-ball", "equality for geodesic balls: sigma1(Omega)/sigma1(Omega*) = 1",
                         sigma / star, 1.0, tol.fem, 1.0));
  }
  if (c.sector_cross_check) {
    rows.push_back(leq("sector-truncation", "sectors l >= 2 lie above sigma1 from l in {0, 1}",
                       sigma, ctx.spectrum().sector(2).eigenvalues.front(), 0.0));
  }
  return rows;
}

/// Quantities shared by the rows of the comparison chain, all about the
/// centre of mass.
struct ChainQuantities {
  double area = 0.0;           // |Sigma|
  double volume = 0.0;         // |Omega|
  double R = 0.0;              // |B(R)| = |Omega|
  double ball_volume = 0.0;    // |B(R)|
  double sphere_area = 0.0;    // |S(R)|
  double gR = 0.0;
  double gpR = 0.0;
  double mu = 0.0;             // int_Omega lambda' g / lambda
  double mu_ball = 0.0;        // int_{B(R)} lambda' g / lambda
  double mu_slack = 0.0;
  double energy = 0.0;         // int_Omega (g')^2 + (n-1) g^2 / lambda^2
  double ball_energy = 0.0;    // the same over B(R)
  double boundary_g2 = 0.0;    // int_Sigma g^2
  double boundary_g = 0.0;     // int_Sigma g
  double h_mu = 0.0;           // h(mu)
  double h_ball = 0.0;         // h(mu_ball)
  TransplantResult transplant; // int_Omega F vs int_{B(R)} F, F decreasing
};

inline ChainQuantities chain_quantities(CaseContext& ctx) {
  const Dimension& dim = ctx.dim();
  const GFunction& g = ctx.g();
  const RadialProfile& p = ctx.centered().profile;
  const auto geo = geometry(p);
  ChainQuantities q;
  q.area = geo.boundary_area;
  q.volume = geo.volume;
  q.R = geo.volume_radius;
  q.ball_volume = hypgeo::ball_volume(dim, q.R);
  q.sphere_area = hypgeo::sphere_area(dim, q.R);
  q.gR = g(q.R);
  q.gpR = g.prime(q.R);
  const auto weight = mass_transplant_check(
      p, [&](double r) { return g.ratios(r).a; }, Monotonicity::increasing);
  q.mu = weight.domain_integral;
  q.mu_ball = weight.ball_integral;
  q.mu_slack = weight.slack;
  q.energy = ctx.terms().energy;
  q.boundary_g2 = ctx.terms().boundary;
  q.boundary_g = boundary_integral(p, [&](const SurfacePoint& s) { return g(s.rho); });
  q.ball_energy = dim.omega * quad::integrate(
                                  [&](double r) { return g.energy_density(r) * hypgeo::sinh_power(r, dim.n - 1); },
                                  0.0, q.R, 1e-15);
  q.h_mu = ctx.h().covering(q.mu)(q.mu);
  q.h_ball = ctx.h().covering(q.mu_ball)(q.mu_ball);
  q.transplant = mass_transplant_check(
      p, [&](double r) { return g.transplant_integrand(r); }, Monotonicity::decreasing);
  return q;
}

inline std::vector<Row> lemma_chain_check(CaseContext& ctx) {
  const int n = ctx.dim().n;
  const auto& c = ctx.spec();
  const Tolerances& tol = c.tol;
  if (n < 3) throw DomainError("comparison chain needs n >= 3");
  if (n == 3 && !(circumscribed_radius(ctx.profile()) <= n3_threshold())) {
    throw DomainError("n = 3 chain needs circumscribed radius <= R0");
  }
  const bool four = n == 4;
  const ChainQuantities q = chain_quantities(ctx);
  const double sigma = ctx.spectrum().sigma1();
  const double ball_sigma = q.gpR / q.gR;
  const double delta = q.mu - q.mu_ball;
  // h^p is expanded to first order at the ball weight: p = 2, or 4/3 in H^4
  const double p = four ? 4.0 / 3.0 : 2.0;
  const double coefficient = four ? 1.0 : 2.0 * (n - 1) / n;  // p (n-1) / n
  const double sp = std::pow(q.sphere_area, -p);
  const double t1 = sp * (1.0 - p * (n - 1) * delta / q.ball_volume);
  const double t2 = sp * (1.0 - coefficient * delta / (q.gpR * q.ball_volume));
  const double t3 = sp * q.energy / (q.gpR * q.ball_volume);
  const double h2 = q.h_mu * q.h_mu;
  const double gb = q.gpR * q.ball_volume;

  std::vector<Row> rows;
  auto add = [&](Row r) { rows.push_back(std::move(r)); };
  add(equal("h-ball", "h(int_{B(R)} lambda' g / lambda) = 1/|S(R)|", q.h_ball, 1.0 / q.sphere_area,
            tol.analytic));
  add(equal("ball-energy", "int_{B(R)} (g')^2 + (n-1) g^2/lambda^2 = g'(R) |B(R)|", q.ball_energy, gb,
            tol.analytic));
  {
    Row r = leq("transplant-energy",
                four ? "(g')^2 + 3 g^2/lambda^2 + lambda' g/lambda is decreasing, so int_Omega <= int_{B(R)}"
                     : "(g')^2 + (n-1) g^2/lambda^2 + 2(n-1)/n lambda' g/lambda is decreasing, so int_Omega <= int_{B(R)}",
                q.transplant.domain_integral, q.transplant.ball_integral, tol.quadrature);
    add(r);
  }
  add(geq("transplant-weight", "lambda' g/lambda is increasing, so int_Omega >= int_{B(R)}", q.mu,
          q.mu_ball, tol.quadrature));
  add(leq("after-decreasing",
          four ? "int_Omega l'g/l - int_{B(R)} l'g/l <= g'(R)|B(R)| - int_Omega (g')^2 + 3g^2/l^2"
               : "2(n-1)/n (int_Omega l'g/l - int_{B(R)} l'g/l) <= g'(R)|B(R)| - int_Omega (g')^2 + (n-1)g^2/l^2",
          coefficient * delta, gb - q.energy, tol.quadrature, gb));
  add(leq("rayleigh-bound", "sigma1(Omega) int_Sigma g^2 <= int_Omega (g')^2 + (n-1) g^2/lambda^2",
          sigma, q.energy / q.boundary_g2, tol.fem));
  add(geq("cauchy-schwarz", "int_Sigma g^2 >= (int_Sigma g)^2 / |Sigma|", q.boundary_g2,
          q.boundary_g * q.boundary_g / q.area, tol.quadrature));
  add(geq("monotone-A0", "A(0) = (int_Sigma g / |Sigma|) / (|Omega| h(int_Omega l'g/l)) >= 1",
          (q.boundary_g / q.area) / (q.volume * q.h_mu), 1.0, tol.quadrature));
  add(geq("boundary-g2", "int_Sigma g^2 >= |Sigma| |Omega|^2 h(int_Omega l'g/l)^2", q.boundary_g2,
          q.area * q.volume * q.volume * h2, tol.quadrature));
  add(leq("g-prime-at-R", "g'(R) <= 1/n", q.gpR, 1.0 / n, tol.analytic));
  add(geq("h-tangent", "h(mu)^p >= h(mu_B)^p + p h(mu_B)^{p-1} h'(mu_B) (mu - mu_B)", std::pow(q.h_mu, p),
          t1, tol.quadrature, sp));
  add(geq("g-prime-step", "replace the (n-1)/|B(R)| factor using g'(R) <= 1/n", t1, t2, tol.quadrature, sp));
  add(geq("energy-step", "bound the weight difference through the transplanted energy", t2, t3,
          tol.quadrature, sp));
  add(geq("h-lower-bound",
          "h(int_Omega l'g/l)^p >= int_Omega ((g')^2 + (n-1)g^2/l^2) / (g'(R)|B(R)||S(R)|^p)",
          std::pow(q.h_mu, p), t3, tol.quadrature, sp));
  if (four) {
    add(geq("boundary-g2-ball", "int_Sigma g^2 >= g(R) |B(R)|", q.boundary_g2, q.gR * q.ball_volume,
            tol.quadrature));
    const double denominator = std::cbrt(q.boundary_g2) * std::pow(q.boundary_g2 / q.area, 2.0 / 3.0);
    add(geq("denominator", "(int g^2)^{1/3} (int g^2/|Sigma|)^{2/3} >= (g(R)|B(R)|)^{1/3} (|Omega|^2 h^2)^{2/3}",
            denominator, std::cbrt(q.gR * q.ball_volume) * std::pow(q.volume * q.volume * h2, 2.0 / 3.0),
            tol.quadrature));
    const double bound = q.energy / (std::cbrt(q.gR) * std::pow(q.ball_volume, 5.0 / 3.0) * std::pow(q.h_mu, p));
    const double target = std::pow(q.sphere_area, 2.0 / 3.0) * ball_sigma;
    add(leq("lemma-quadrature", "int_Omega ((g')^2 + 3g^2/l^2) / (g(R)^{1/3} |B(R)|^{5/3} h^{4/3}) <= |S(R)|^{2/3} sigma1(B(R))",
            bound, target, tol.quadrature));
    add(leq("lemma", c.anchors.count(Check::lemma_chain) ? c.anchors.at(Check::lemma_chain) : default_anchor(Check::lemma_chain),
            std::pow(q.area, 2.0 / 3.0) * sigma, target, tol.fem));
  } else {
    add(leq("imcf-upper-bound", "sigma1(Omega) <= int_Omega ((g')^2 + (n-1)g^2/l^2) / (|Omega|^2 |Sigma| h^2)",
            sigma, q.energy / (q.volume * q.volume * q.area * h2), tol.fem));
    const double target = q.sphere_area * ball_sigma;
    add(leq("lemma-quadrature", "int_Omega ((g')^2 + (n-1)g^2/l^2) / (|Omega|^2 h^2) <= |S(R)| sigma1(B(R))",
            q.energy / (q.volume * q.volume * h2), target, tol.quadrature));
    add(leq("lemma", c.anchors.count(Check::lemma_chain) ? c.anchors.at(Check::lemma_chain) : default_anchor(Check::lemma_chain),
            q.area * sigma, target, tol.fem));
  }
  add(geq("isoperimetric", "|Sigma| >= |S(R)| for |B(R)| = |Omega|", q.area, q.sphere_area, tol.quadrature));
  const double power = four ? 2.0 / 3.0 : 1.0;
  const double r_star = ctx.geo().area_radius;
  add(leq("ball-scaling", "|S(r)|^q sigma1(B(r)) is increasing in r, compared at R <= R*",
          std::pow(q.sphere_area, power) * ball_sigma,
          std::pow(q.area, power) * ctx.g().sigma1_ball(r_star), tol.analytic));
  return rows;
}

inline std::vector<Row> corollary_check(CaseContext& ctx) {
  const int n = ctx.dim().n;
  const auto& c = ctx.spec();
  const std::string anchor = c.anchors.count(Check::corollary) ? c.anchors.at(Check::corollary)
                                                              : default_anchor(Check::corollary);
  const auto& spectrum = ctx.spectrum();
  const double lhs = harmonic_mean_lhs(spectrum);
  const double star = sigma1_exact_ball(ctx.dim(), ctx.geo().area_radius);
  std::vector<Row> rows;
  rows.push_back(geq("corollary", anchor, lhs, (n - 1) / star, c.tol.fem));
  const auto& t = ctx.terms();
  rows.push_back(leq("corollary-intermediate",
                     "int_Sigma g^2 <= 1/(n-1) sum_{i<n} 1/sigma_i int_Omega (g')^2 + (n-1)g^2/l^2",
                     t.boundary, lhs * t.energy / (n - 1), c.tol.corollary_intermediate));
  return rows;
}

inline std::vector<Row> transplant_check(CaseContext& ctx) {
  const auto& c = ctx.spec();
  const GFunction& g = ctx.g();
  const RadialProfile& p = ctx.profile();
  const bool centred_ball = ctx.centred_ball();
  const double tol = c.tol.transplant;
  std::vector<Row> rows;
  auto row = [&](const std::string& name, const std::string& anchor, const TransplantResult& t,
                 bool equality, bool increasing) {
    Row r;
    if (equality) {
      r = equal(name, anchor + " (equality)", t.domain_integral, t.ball_integral, tol);
    } else if (increasing) {
      r = geq(name, anchor + " (strict)", t.domain_integral, t.ball_integral, -tol);
    } else {
      r = leq(name, anchor + " (strict)", t.domain_integral, t.ball_integral, -tol);
    }
    r.slack = equality ? -std::abs(t.slack) : t.slack;
    r.pass = equality ? std::abs(t.slack) < tol : t.slack > tol;
    rows.push_back(r);
  };
  row("transplant-weight", "f = lambda' g / lambda increasing: int_Omega f >= int_{B(R)} f",
      mass_transplant_check(p, [&](double r) { return g.ratios(r).a; }, Monotonicity::increasing),
      centred_ball, true);
  const int n = ctx.dim().n;
  const bool gated = n == 3 && 2 * n3_threshold() >= p.max_radius();
  if (n >= 4 || gated) {
    row("transplant-energy", "f = chain integrand, decreasing: int_Omega f <= int_{B(R)} f",
        mass_transplant_check(p, [&](double r) { return g.transplant_integrand(r); },
                              Monotonicity::decreasing),
        centred_ball, false);
  }
  row("transplant-constant", "f = 1: int_Omega f = int_{B(R)} f",
      mass_transplant_check(p, [](double) { return 1.0; }, Monotonicity::decreasing), true, false);
  return rows;
}

inline std::vector<Row> flow_check(CaseContext& ctx) {
  const auto& c = ctx.spec();
  const Tolerances& tol = c.tol;
  const std::string anchor = c.anchors.count(Check::flow) ? c.anchors.at(Check::flow) : default_anchor(Check::flow);
  ctx.geo();
  const FlowTrace trace = run(ctx.profile(), c.flow, &ctx.h());
  const auto& first = trace.samples.front();
  const auto& last = trace.samples.back();
  std::vector<Row> rows;
  rows.push_back(bounded("flow-monotone", anchor + ": largest increase of A between samples",
                         trace.max_increase(), tol.flow));
  rows.back().note = "samples=" + std::to_string(trace.samples.size()) +
                     " steps=" + std::to_string(trace.steps) + " t_end=" + std::to_string(last.t);
  rows.push_back(geq("flow-start", "A(0) >= 1", first.A, 1.0, tol.quadrature));
  rows.push_back(geq("flow-limit", "A(t_end) >= 1 - tolerance", last.A, 1.0, tol.flow_limit));
  rows.push_back(equal("flow-area", "|Sigma_t| = |Sigma_0| e^t", last.area, first.area * std::exp(last.t),
                       tol.flow_area));
  if (c.shape.kind == ShapeSpec::Kind::sphere) {
    const int n = ctx.dim().n;
    double worst = 0.0;
    for (const auto& s : trace.samples) {
      const double r = std::asinh(std::sinh(c.shape.r0) * std::exp(s.t / (n - 1)));
      worst = std::max({worst, std::abs(s.max_rho - r), std::abs(s.min_rho - r)});
    }
    rows.push_back(bounded("flow-sphere-radius", "centred spheres: sinh r(t) = sinh r(0) e^{t/(n-1)}", worst,
                           tol.flow_sphere));
  }
  return rows;
}

/// All enabled checks of one case.  Failures inside a check become failing
/// rows rather than aborting the run.
inline std::vector<Row> run_case(const VerificationCase& vc) {
  CaseContext ctx(vc);
  std::vector<Row> rows;
  auto guarded = [&](Check c, auto&& body) {
    if (!vc.enabled(c)) return;
    try {
      auto produced = body();
      rows.insert(rows.end(), produced.begin(), produced.end());
    } catch (const std::exception& e) {
      rows.push_back(failure(to_string(c), vc.anchors.count(c) ? vc.anchors.at(c) : default_anchor(c), e.what()));
    }
  };
  guarded(Check::weinstock, [&] { return weinstock_check(ctx); });
  guarded(Check::lemma_chain, [&] { return lemma_chain_check(ctx); });
  guarded(Check::corollary, [&] { return corollary_check(ctx); });
  guarded(Check::transplant, [&] { return transplant_check(ctx); });
  guarded(Check::flow, [&] { return flow_check(ctx); });
  for (auto& r : rows) r.case_id = vc.id;
  return rows;
}

struct RunOptions {
  std::string name = "verify";
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::function<void(std::size_t done, std::size_t total, const std::string& id)> progress;
};

/// Runs cases on a worker pool; rows keep the case order.
inline Report run_cases(const std::vector<VerificationCase>& cases, const RunOptions& options = {}) {
  std::vector<std::vector<Row>> results(cases.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      results[i] = run_case(cases[i]);
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        options.progress(++done, cases.size(), cases[i].id);
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(cases.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  Report report;
  report.name = options.name;
  report.seed = options.seed;
  report.cases = cases.size();
  for (auto& r : results) report.rows.insert(report.rows.end(), r.begin(), r.end());
  return report;
}

// ---------------------------------------------------------------------------
// Random profile family

struct FamilyOptions {
  double r0_min = 0.3;
  double r0_max = 3.0;
  double eps = 0.15;
  int k_min = 2;
  int k_max = 5;
  /// For n = 3, also reject circumscribed radius > R0.
  bool n3_gate = true;
  int max_attempts = 10000;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream for member i of a family, so that cases can be drawn
/// or evaluated out of order.
inline std::uint64_t member_seed(std::uint64_t seed, int n, std::size_t i) {
  return splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(n) << 32 | i));
}

/// rho = r0 (1 + sum_{k=k_min}^{k_max} eps_k P_k(cos theta)), rejection
/// sampled until mean convex.
inline ShapeSpec random_shape(const Dimension& dim, std::uint64_t seed, const FamilyOptions& o = {},
                              std::size_t nodes = 64) {
  std::mt19937_64 rng(seed);
  double r0_max = o.r0_max;
  if (dim.n == 3 && o.n3_gate) r0_max = std::min(r0_max, n3_threshold(dim));
  std::uniform_real_distribution<double> radius(o.r0_min, r0_max);
  std::uniform_real_distribution<double> coefficient(-o.eps, o.eps);
  for (int attempt = 0; attempt < o.max_attempts; ++attempt) {
    std::vector<double> legendre(static_cast<std::size_t>(o.k_max + 1), 0.0);
    const double r0 = radius(rng);
    for (int k = o.k_min; k <= o.k_max; ++k) legendre[static_cast<std::size_t>(k)] = coefficient(rng);
    const ShapeSpec spec = ShapeSpec::perturbed(r0, legendre);
    try {
      const RadialProfile p = make_profile(dim, spec, nodes);
      if (!geometry(p).mean_convex()) continue;
      if (dim.n == 3 && o.n3_gate && !(circumscribed_radius(p) <= n3_threshold(dim))) continue;
      return spec;
    } catch (const DomainError&) {
      continue;
    }
  }
  throw NumericalError("random_shape: no admissible profile after " + std::to_string(o.max_attempts) +
                       " attempts");
}

struct FamilySpec {
  std::string name = "random";
  int n = 4;
  std::size_t count = 10;
  FamilyOptions options;
  std::set<Check> checks{Check::weinstock};
};

/// Expands a family into cases; every tenth case also solves sector 2.
inline std::vector<VerificationCase> expand_family(const FamilySpec& f, std::uint64_t seed,
                                                   const VerificationCase& base = {}) {
  std::vector<VerificationCase> out;
  const Dimension dim(f.n);
  for (std::size_t i = 0; i < f.count; ++i) {
    VerificationCase c = base;
    c.id = f.name + "-" + std::to_string(i);
    c.n = f.n;
    c.shape = random_shape(dim, member_seed(seed, f.n, i), f.options, c.nodes);
    c.checks.clear();
    c.anchors.clear();
    for (Check k : f.checks) c.enable(k);
    c.sector_cross_check = base.sector_cross_check || i % 10 == 0;
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Special-function suite

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  }
  return out;
}

/// Richardson-extrapolated central difference.
template <class F>
double derivative(F&& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

template <class F>
int decreases(const std::vector<double>& grid, F&& f, double tol) {
  int violations = 0;
  double prev = f(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < prev - tol) ++violations;
    prev = v;
  }
  return violations;
}

}  // namespace detail

struct GfunSuiteOptions {
  int n_min = 2;
  int n_max = 8;
  std::size_t grid = 2000;
  double r_min = 1e-3;
  double r_max = 30.0;
  double monotone_tolerance = 1e-10;
  double limit_tolerance = 1e-6;
  double h_relation_tolerance = 1e-6;
  double log_convexity_tolerance = 1e-10;
  bool identities = true;
  bool limits = true;
  bool monotonicity = true;
  bool ball = true;
  bool h = true;
  bool threshold = true;
};

/// g identities, limits, monotone combinations, h and n = 3 threshold.
namespace detail {

inline void identity_rows(std::vector<Row>& rows, const GFunction& g, const GfunSuiteOptions& o) {
  const int n = g.dim().n;
  const Tolerances tol;
  double err_volume = 0.0, err_prime = 0.0;
  for (double r : log_grid(o.r_min, 20.0, o.grid)) {
    const double h = 2e-3 * std::min(r, 1.0);
    // (lambda^{n-1} g)' / lambda^{n-1}, scaled to avoid overflow
    const double dv = derivative([&](double x) { return hypgeo::sinh_ratio_power(x, r, n - 1) * g(x); }, r, h);
    err_volume = std::max(err_volume, std::abs(dv - 1.0));
    const double dg = derivative([&](double x) { return g(x); }, r, h);
    err_prime = std::max(err_prime, std::abs(dg - (1.0 - (n - 1) * g.ratios(r).a)));
  }
  rows.push_back(bounded("identity-volume", "(lambda^{n-1} g)' = lambda^{n-1}, finite differences", err_volume,
                         tol.analytic));
  rows.push_back(bounded("identity-g-prime", "g' = 1 - (n-1) lambda' g / lambda, finite differences", err_prime,
                         tol.analytic));
}

inline void limit_rows(std::vector<Row>& rows, const GFunction& g, const GfunSuiteOptions& o) {
  const int n = g.dim().n;
  const double t = o.limit_tolerance;
  rows.push_back(equal("limit-g-over-lambda-0", "g/lambda -> 1/n as r -> 0", g.over_lambda(1e-5), 1.0 / n, t, 1.0));
  rows.push_back(equal("limit-g-inf", "g -> 1/(n-1) as r -> inf", g(40.0), 1.0 / (n - 1), t, 1.0));
  rows.push_back(equal("limit-g-prime-0", "g' -> 1/n as r -> 0", g.prime(1e-5), 1.0 / n, t, 1.0));
  rows.push_back(equal("limit-g-prime-inf", "g' -> 0 as r -> inf", g.prime(40.0), 0.0, t, 1.0));
  if (n >= 4) {
    const double s = std::sinh(40.0);
    rows.push_back(equal("limit-lambda2-g-prime-inf", "lambda^2 g' -> 1/(n-3) as r -> inf", s * s * g.prime(40.0),
                         1.0 / (n - 3), t, 1.0));
  }
}

inline void monotonicity_rows(std::vector<Row>& rows, const GFunction& g, const GfunSuiteOptions& o) {
  const int n = g.dim().n;
  const Dimension& dim = g.dim();
  const auto grid = log_grid(o.r_min, o.r_max, o.grid);
  auto monotone = [&](const std::string& name, const std::string& anchor, auto&& f) {
    Row r = leq(name, anchor, decreases(grid, f, o.monotone_tolerance), 0.0, 0.0, 1.0);
    r.relation = "violations<=";
    rows.push_back(r);
  };
  monotone("mono-g", "g is increasing", [&](double r) { return g(r); });
  monotone("mono-g-prime", "g' is decreasing (g concave)", [&](double r) { return -g.prime(r); });
  monotone("mono-a", "lambda' g / lambda is increasing", [&](double r) { return g.ratios(r).a; });
  monotone("mono-b", "lambda lambda' g' / g is increasing", [&](double r) { return g.ratios(r).b; });
  monotone("mono-c", "lambda^2 g' / g is increasing", [&](double r) { return g.ratios(r).c; });
  monotone("mono-g-one-plus-g-prime", "g (1 + g') is increasing", [&](double r) { return g.g_one_plus_gprime(r); });
  if (n >= 4) {
    monotone("mono-chain-integrand",
             n == 4 ? "(g')^2 + 3 g^2/lambda^2 + lambda' g/lambda is decreasing"
                    : "(g')^2 + (n-1) g^2/lambda^2 + 2(n-1)/n lambda' g/lambda is decreasing",
             [&](double r) { return -g.transplant_integrand(r); });
  }
  if (n >= 3) {
    monotone("mono-scaled-ball", "|S(r)| sigma1(B(r)) is increasing",
             [&](double r) { return hypgeo::sphere_area(dim, r) * g.sigma1_ball(r); });
    monotone("mono-scaled-ball-power", "|S(r)|^{2/(n-1)} sigma1(B(r)) is increasing",
             [&](double r) { return std::pow(hypgeo::sphere_area(dim, r), 2.0 / (n - 1)) * g.sigma1_ball(r); });
  }
  double outside = 0.0, bmax = 0.0;
  for (double r : grid) {
    const auto m = g.ratios(r);
    outside = std::max({outside, 1.0 / n - m.a, m.a - 1.0 / (n - 1)});
    bmax = std::max(bmax, m.b);
  }
  rows.push_back(bounded("bound-a", "1/n <= lambda' g / lambda <= 1/(n-1)", outside, 1e-12));
  if (n >= 4) {
    rows.push_back(leq("bound-b", "lambda lambda' g' / g <= (n-1)/(n-3)", bmax, (n - 1.0) / (n - 3.0), 1e-10));
  }
}

inline void ball_rows(std::vector<Row>& rows, const GFunction& g) {
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(g.sigma1_ball_rayleigh(r) / g.sigma1_ball(r) - 1.0));
  rows.push_back(bounded("ball-rayleigh", "sigma1(B(r)) = g'/g equals the coordinate Rayleigh quotient", worst,
                         Tolerances{}.quadrature));
}

/// h: definition, h'/h = -(n-1)/|B(t)| by finite differences of the
/// inverted table, and log-convexity on a uniform weight grid.
inline void h_rows(std::vector<Row>& rows, const Dimension& dim, const GfunSuiteOptions& o) {
  const int n = dim.n;
  const HFunction& h = *shared_h_function(dim);
  double def_err = 0.0, rel_err = 0.0;
  for (double t : log_grid(0.05, 8.0, 100)) {
    const double s = h.weight(t);
    def_err = std::max(def_err, std::abs(h(s) * hypgeo::sphere_area(dim, t) - 1.0));
    const double fd = derivative([&](double x) { return h(x); }, s, 1e-3 * s);
    const double expected = -(n - 1) * h(s) / hypgeo::ball_volume(dim, t);
    rel_err = std::max(rel_err, std::abs(fd / expected - 1.0));
  }
  rows.push_back(bounded("h-definition", "h(int_{B(t)} lambda' g/lambda) = 1/|S(t)|", def_err, Tolerances{}.analytic));
  rows.push_back(bounded("h-relation", "h'/h = -(n-1)/|B(t)|, finite differences", rel_err, o.h_relation_tolerance));
  const double s_lo = h.weight(0.1), s_hi = h.weight(6.0);
  const std::size_t m = o.grid;
  auto at = [&](std::size_t i) { return h.log_value(s_lo + (s_hi - s_lo) * static_cast<double>(i) / (m - 1)); };
  double worst = 0.0;
  double prev2 = at(0), prev1 = at(1);
  for (std::size_t i = 2; i < m; ++i) {
    const double cur = at(i);
    worst = std::min(worst, cur - 2 * prev1 + prev2);
    prev2 = prev1;
    prev1 = cur;
  }
  rows.push_back(geq("h-log-convex", "log h is convex: smallest second difference", worst, 0.0,
                     o.log_convexity_tolerance, 1.0));
}

}  // namespace detail

/// g identities, limits, monotone combinations, ball eigenvalues, h and the
/// n = 3 threshold, one case per dimension.
inline Report gfun_suite(const GfunSuiteOptions& o = {}) {
  Report report;
  report.name = "gfun";
  for (int n = o.n_min; n <= o.n_max; ++n) {
    ++report.cases;
    const Dimension dim(n);
    const GFunction g(dim);
    std::vector<Row> rows;
    if (o.identities) detail::identity_rows(rows, g, o);
    if (o.limits) detail::limit_rows(rows, g, o);
    if (o.monotonicity) detail::monotonicity_rows(rows, g, o);
    if (o.ball && n >= 3) detail::ball_rows(rows, g);
    if (o.h) detail::h_rows(rows, dim, o);
    for (auto& r : rows) {
      r.case_id = "n=" + std::to_string(n);
      report.rows.push_back(std::move(r));
    }
  }
  if (o.threshold) {
    ++report.cases;
    const Dimension d3(3);
    const double r0 = n3_threshold(d3);
    Row r = equal("n3-threshold", "b(2 R0) = 5/2", GFunction(d3).ratios(2 * r0).b, 2.5, 1e-10, 1.0);
    std::ostringstream note;
    note.precision(17);
    note << "R0=" << r0;
    r.note = note.str();
    r.case_id = "n=3";
    report.rows.push_back(r);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Configuration files
//
// INI syntax.  Top-level keys: name, seed, threads.  Sections:
//   [tolerances]   analytic, quadrature, fem, flow, transplant, ...
//   [fem]          elements, radial_elements, order, count
//   [flow]         t_end, dt, sample_dt, kappa_tolerance, cfl, filter
//   [case <id>]    n, shape | profile, nodes, checks, sector_cross_check, n3_gate
//   [family <id>]  n, count, checks, r0_min, r0_max, eps, k_min, k_max
// `checks` is a space- or comma-separated list of weinstock, lemma_chain,
// corollary, transplant, flow.

struct Config {
  std::string name = "verify";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  VerificationCase defaults;
  std::vector<VerificationCase> cases;
  std::vector<FamilySpec> families;

  /// Explicit cases followed by every family member.
  std::vector<VerificationCase> expand() const {
    std::vector<VerificationCase> all = cases;
    for (const auto& f : families) {
      auto members = expand_family(f, seed, defaults);
      all.insert(all.end(), members.begin(), members.end());
    }
    return all;
  }
};

namespace detail {

inline std::set<Check> parse_checks(const std::string& text) {
  std::set<Check> out;
  std::string word;
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  while (is >> word) out.insert(parse_check(word));
  return out;
}

inline bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw DomainError("expected a boolean, got '" + text + "'");
}

using Tree = boost::property_tree::ptree;

inline void check_keys(const Tree& section, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : section) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw DomainError("config: unknown key '" + key + "' in " + where);
    }
  }
}

inline void apply_tolerances(const Tree& t, Tolerances& tol) {
  check_keys(t, "[tolerances]", {"analytic", "quadrature", "fem", "flow", "transplant", "corollary_intermediate",
                                 "flow_limit", "flow_area", "flow_sphere"});
  tol.analytic = t.get("analytic", tol.analytic);
  tol.quadrature = t.get("quadrature", tol.quadrature);
  tol.fem = t.get("fem", tol.fem);
  tol.flow = t.get("flow", tol.flow);
  tol.transplant = t.get("transplant", tol.transplant);
  tol.corollary_intermediate = t.get("corollary_intermediate", tol.corollary_intermediate);
  tol.flow_limit = t.get("flow_limit", tol.flow_limit);
  tol.flow_area = t.get("flow_area", tol.flow_area);
  tol.flow_sphere = t.get("flow_sphere", tol.flow_sphere);
}

inline void apply_fem(const Tree& t, SteklovOptions& fem) {
  check_keys(t, "[fem]", {"elements", "radial_elements", "order", "count"});
  fem.elements = t.get("elements", fem.elements);
  fem.radial_elements = t.get("radial_elements", fem.radial_elements);
  fem.order = t.get("order", fem.order);
  fem.count = t.get("count", fem.count);
}

inline void apply_flow(const Tree& t, FlowOptions& flow) {
  check_keys(t, "[flow]", {"t_end", "dt", "sample_dt", "kappa_tolerance", "cfl", "filter"});
  flow.t_end = t.get("t_end", flow.t_end);
  flow.dt = t.get("dt", flow.dt);
  flow.sample_dt = t.get("sample_dt", flow.sample_dt);
  flow.kappa_tolerance = t.get("kappa_tolerance", flow.kappa_tolerance);
  flow.cfl = t.get("cfl", flow.cfl);
  if (auto f = t.get_optional<std::string>("filter")) flow.filter = parse_bool(*f);
}

}  // namespace detail

/// Relative `profile = ...` paths resolve against `base_dir`.
inline Config parse_config(std::istream& is, const std::string& base_dir = ".") {
  detail::Tree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  Config cfg;
  // top-level values first; sections that tune defaults next; cases last
  for (const auto& [key, node] : tree) {
    if (!node.empty()) continue;
    const std::string value = node.data();
    if (key == "name") cfg.name = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(value));
    else throw DomainError("config: unknown top-level key '" + key + "'");
  }
  if (auto t = tree.get_child_optional("tolerances")) detail::apply_tolerances(*t, cfg.defaults.tol);
  if (auto t = tree.get_child_optional("fem")) detail::apply_fem(*t, cfg.defaults.fem);
  if (auto t = tree.get_child_optional("flow")) detail::apply_flow(*t, cfg.defaults.flow);

  for (const auto& [key, node] : tree) {
    if (node.empty() || key == "tolerances" || key == "fem" || key == "flow") continue;
    std::istringstream words(key);
    std::string kind, id;
    words >> kind >> id;
    if (id.empty()) throw DomainError("config: section [" + key + "] needs a name");
    if (kind == "case") {
      detail::check_keys(node, "[" + key + "]", {"n", "shape", "profile", "nodes", "checks", "sector_cross_check", "n3_gate"});
      VerificationCase c = cfg.defaults;
      c.id = id;
      c.n = node.get("n", 4);
      c.nodes = node.get("nodes", c.nodes);
      if (auto path = node.get_optional<std::string>("profile")) {
        std::filesystem::path file(*path);
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        const auto loaded = read_profile(file.string());
        c.shape = ShapeSpec::nodes(loaded.profile.rho());
        if (!node.get_optional<int>("n")) c.n = loaded.profile.dim().n;
        if (c.n != loaded.profile.dim().n) throw DomainError("config: n disagrees with " + file.string());
      } else {
        c.shape = ShapeSpec::parse(node.get<std::string>("shape", "sphere r0=1"));
      }
      for (Check k : detail::parse_checks(node.get<std::string>("checks", "weinstock"))) c.enable(k);
      if (auto v = node.get_optional<std::string>("sector_cross_check")) c.sector_cross_check = detail::parse_bool(*v);
      if (auto v = node.get_optional<std::string>("n3_gate")) c.n3_gate = detail::parse_bool(*v);
      cfg.cases.push_back(std::move(c));
    } else if (kind == "family") {
      detail::check_keys(node, "[" + key + "]", {"n", "count", "checks", "r0_min", "r0_max", "eps", "k_min", "k_max", "n3_gate"});
      FamilySpec f;
      f.name = id;
      f.n = node.get("n", 4);
      f.count = node.get<std::size_t>("count", 10);
      f.checks = detail::parse_checks(node.get<std::string>("checks", "weinstock"));
      f.options.r0_min = node.get("r0_min", f.options.r0_min);
      f.options.r0_max = node.get("r0_max", f.options.r0_max);
      f.options.eps = node.get("eps", f.options.eps);
      f.options.k_min = node.get("k_min", f.options.k_min);
      f.options.k_max = node.get("k_max", f.options.k_max);
      if (auto v = node.get_optional<std::string>("n3_gate")) f.options.n3_gate = detail::parse_bool(*v);
      cfg.families.push_back(std::move(f));
    } else {
      throw DomainError("config: unknown section [" + key + "]");
    }
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_config(is, std::filesystem::path(path).parent_path().string());
}

/// Built-in flow suite: centred spheres and perturbed spheres in n = 4, 5.
inline std::vector<VerificationCase> default_flow_cases() {
  std::vector<VerificationCase> out;
  for (int n : {4, 5}) {
    VerificationCase s;
    s.id = "flow-sphere-n" + std::to_string(n);
    s.n = n;
    s.shape = ShapeSpec::sphere(0.8);
    s.flow.t_end = 2.0;
    s.flow.kappa_tolerance = 0.0;
    s.enable(Check::flow);
    out.push_back(s);
    VerificationCase p = s;
    p.id = "flow-perturbed-n" + std::to_string(n);
    p.shape = ShapeSpec::perturbed(0.9, {0, 0, 0.13, -0.065, 0.052});
    p.flow.t_end = 4.0;
    out.push_back(p);
  }
  return out;
}

inline Report flow_suite(const std::vector<VerificationCase>& cases, RunOptions options = {}) {
  std::vector<VerificationCase> selected;
  for (const auto& c : cases) {
    if (c.enabled(Check::flow)) {
      VerificationCase only = c;
      only.checks = {Check::flow};
      selected.push_back(std::move(only));
    }
  }
  options.name = "flow";
  return run_cases(selected, options);
}

/// Transplantation rows for the given cases, always including a centred
/// ball so that the equality rows are exercised.
inline Report transplant_suite(const std::vector<VerificationCase>& cases, RunOptions options = {}) {
  std::vector<VerificationCase> selected;
  for (int n : {4, 5}) {
    VerificationCase ball;
    ball.id = "transplant-ball-n" + std::to_string(n);
    ball.n = n;
    ball.shape = ShapeSpec::sphere(1.0);
    ball.enable(Check::transplant);
    selected.push_back(ball);
  }
  for (const auto& c : cases) {
    VerificationCase only = c;
    only.checks.clear();
    only.enable(Check::transplant);
    selected.push_back(std::move(only));
  }
  options.name = "transplant";
  return run_cases(selected, options);
}

}  // namespace weinstock::harness
