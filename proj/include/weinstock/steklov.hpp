#pragma once

// Steklov eigenvalues of axisymmetric domains.
//
// Eigenfunctions split as u(r, theta) Y(psi) with Y a spherical harmonic of
// degree l on the (n-2)-sphere swept by the rotation.  Each sector l is a
// two-dimensional weighted problem on the meridian region, discretised by
// continuous tensor-product Lagrange elements on the rectangle
// (s, theta) in [0, 1] x [0, pi], r = s rho(theta).  The interior is
// eliminated exactly (Dirichlet-to-Neumann Schur complement) and the small
// dense boundary pencil is solved directly.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "weinstock/domain.hpp"
#include "weinstock/error.hpp"
#include "weinstock/gfun.hpp"
#include "weinstock/hypgeo.hpp"
#include "weinstock/quadrature.hpp"

namespace weinstock {

struct SteklovOptions {
  /// Elements along theta.
  int elements = 48;
  /// Elements along s; 0 picks elements / 4 (at least 2).
  int radial_elements = 0;
  int order = 4;
  /// Eigenvalues kept per sector.
  int count = 6;
};

/// Dimension of the degree-l spherical harmonics on S^{n-2}.
inline int sector_multiplicity(const Dimension& dim, int l) {
  const int d = dim.n - 2;
  auto binom = [](int top, int k) -> long long {
    if (top < k || top < 0) return 0;
    long long b = 1;
    for (int i = 1; i <= k; ++i) b = b * (top - k + i) / i;
    return b;
  };
  return static_cast<int>(binom(l + d, d) - binom(l + d - 2, d));
}

struct SectorSpectrum {
  int sector = 0;
  int multiplicity = 1;
  std::vector<double> eigenvalues;
  /// Boundary nodes carrying the traces.
  std::vector<double> trace_theta;
  /// Column k is the trace of eigenfunction k at trace_theta, normalised in
  /// the boundary mass inner product.
  Eigen::MatrixXd traces;
  /// Boundary mass matrix on trace_theta (for checks).
  Eigen::MatrixXd mass;
};

struct SteklovSpectrum {
  struct Entry {
    double value;
    int sector;
    int index;
    int multiplicity;
  };

  Dimension dim{3};
  std::vector<SectorSpectrum> sectors;

  std::vector<Entry> combined() const {
    std::vector<Entry> all;
    for (const auto& s : sectors) {
      for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        all.push_back({s.eigenvalues[i], s.sector, static_cast<int>(i), s.multiplicity});
      }
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
    return all;
  }

  /// sigma_1 <= sigma_2 <= ... with multiplicities, first k values.  Only
  /// meaningful when every sector that could contribute below the k-th value
  /// was solved.
  std::vector<double> expanded(std::size_t k) const {
    std::vector<double> out;
    for (const auto& e : combined()) {
      for (int m = 0; m < e.multiplicity && out.size() < k; ++m) out.push_back(e.value);
      if (out.size() == k) break;
    }
    if (out.size() < k) {
      throw DomainError("SteklovSpectrum: only " + std::to_string(out.size()) +
                        " eigenvalues available, " + std::to_string(k) + " requested");
    }
    return out;
  }

  double sigma1() const {
    const auto all = combined();
    if (all.empty()) throw DomainError("SteklovSpectrum: empty");
    return all.front().value;
  }

  const SectorSpectrum& sector(int l) const {
    for (const auto& s : sectors) {
      if (s.sector == l) return s;
    }
    throw DomainError("SteklovSpectrum: sector " + std::to_string(l) + " not solved");
  }
};

namespace detail {

struct ReferenceElement {
  std::vector<double> nodes;  // GLL on [-1, 1]
  quad::Rule gauss;           // on [-1, 1]
  std::vector<std::vector<double>> phi, dphi;  // [point][basis]

  explicit ReferenceElement(int order) : nodes(quad::gauss_lobatto_nodes(order)),
                                         gauss(quad::gauss_legendre(order + 2)) {
    phi.resize(gauss.size());
    dphi.resize(gauss.size());
    for (std::size_t q = 0; q < gauss.size(); ++q) {
      quad::lagrange_basis(nodes, gauss.nodes[q], phi[q], dphi[q]);
    }
  }
};

}  // namespace detail

inline SectorSpectrum solve_sector(const RadialProfile& profile, int l,
                                   const SteklovOptions& options = {}) {
  const Dimension& dim = profile.dim();
  const int n = dim.n;
  if (n < 3) throw DomainError("steklov: the sector solver needs n >= 3");
  if (l < 0) throw DomainError("steklov: negative sector");
  const int p = options.order;
  const int et = options.elements;
  const int es = options.radial_elements > 0 ? options.radial_elements : std::max(2, et / 4);
  if (p < 1 || et < 2) throw DomainError("steklov: invalid mesh");
  const int ns = es * p + 1;
  const int nt = et * p + 1;
  const detail::ReferenceElement ref(p);
  const std::size_t nq = ref.gauss.size();
  const double angular = static_cast<double>(l) * (l + n - 3);

  // unknown numbering: interior unknowns first, boundary (s = 1) last
  std::vector<int> index(static_cast<std::size_t>(ns) * nt, -1);
  auto at = [&](int i, int j) -> int& { return index[static_cast<std::size_t>(i) * nt + j]; };
  int count = 0;
  if (l == 0) {
    const int centre = count++;
    for (int j = 0; j < nt; ++j) at(0, j) = centre;
  }
  for (int i = 1; i < ns - 1; ++i) {
    for (int j = 0; j < nt; ++j) {
      if (l > 0 && (j == 0 || j == nt - 1)) continue;
      at(i, j) = count++;
    }
  }
  const int interior = count;
  std::vector<double> trace_theta;
  for (int j = 0; j < nt; ++j) {
    if (l > 0 && (j == 0 || j == nt - 1)) continue;
    at(ns - 1, j) = count++;
    const int e = std::min(j / p, et - 1);
    const int local = j - e * p;
    const double a = std::numbers::pi * e / et, b = std::numbers::pi * (e + 1) / et;
    trace_theta.push_back(0.5 * (a + b) + 0.5 * (b - a) * ref.nodes[local]);
  }
  const int boundary = count - interior;

  // profile data at the theta quadrature points of every element
  struct ThetaPoint {
    double theta, weight, rho, drho, sin_pow, sin2;
  };
  std::vector<ThetaPoint> tpts(static_cast<std::size_t>(et) * nq);
  for (int e = 0; e < et; ++e) {
    const double a = std::numbers::pi * e / et, b = std::numbers::pi * (e + 1) / et;
    for (std::size_t q = 0; q < nq; ++q) {
      ThetaPoint& t = tpts[e * nq + q];
      t.theta = 0.5 * (a + b) + 0.5 * (b - a) * ref.gauss.nodes[q];
      t.weight = 0.5 * (b - a) * ref.gauss.weights[q];
      const auto ev = profile.eval(t.theta);
      t.rho = ev.value;
      t.drho = ev.d1;
      const double sn = std::sin(t.theta);
      t.sin_pow = std::pow(sn, n - 2);
      t.sin2 = sn * sn;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  const int nb = p + 1;
  triplets.reserve(static_cast<std::size_t>(es) * et * nb * nb * nb * nb);
  std::vector<double> ks(nb * nb * nb * nb);
  std::vector<int> dof(nb * nb);
  std::vector<double> vs(nb * nb), vt(nb * nb), v(nb * nb);
  for (int ei = 0; ei < es; ++ei) {
    const double sa = static_cast<double>(ei) / es, sb = static_cast<double>(ei + 1) / es;
    const double hs = 0.5 * (sb - sa);
    for (int ej = 0; ej < et; ++ej) {
      const double ht = 0.5 * std::numbers::pi / et;
      std::fill(ks.begin(), ks.end(), 0.0);
      for (int a = 0; a < nb; ++a) {
        for (int b = 0; b < nb; ++b) dof[a * nb + b] = at(ei * p + a, ej * p + b);
      }
      for (std::size_t qs = 0; qs < nq; ++qs) {
        const double s = 0.5 * (sa + sb) + hs * ref.gauss.nodes[qs];
        for (std::size_t qt = 0; qt < nq; ++qt) {
          const ThetaPoint& t = tpts[ej * nq + qt];
          const double r = s * t.rho;
          const double lam = std::sinh(r);
          const double w = hypgeo::sinh_power(r, n - 1) * t.sin_pow * t.rho * t.weight *
                           ref.gauss.weights[qs] * hs;
          const double inv_rho2 = 1.0 / (t.rho * t.rho);
          const double inv_l2 = 1.0 / (lam * lam);
          const double shear = s * t.drho / t.rho;
          const double ang = angular * inv_l2 / t.sin2;
          // basis (a, b) = s-index a, theta-index b
          for (int a = 0; a < nb; ++a) {
            for (int b = 0; b < nb; ++b) {
              const int k = a * nb + b;
              const double dsv = ref.dphi[qs][a] / hs * ref.phi[qt][b];
              const double dtv = ref.phi[qs][a] * ref.dphi[qt][b] / ht;
              v[k] = ref.phi[qs][a] * ref.phi[qt][b];
              vs[k] = dsv;
              vt[k] = dtv - shear * dsv;
            }
          }
          const int m = nb * nb;
          for (int x = 0; x < m; ++x) {
            if (dof[x] < 0) continue;
            for (int y = x; y < m; ++y) {
              if (dof[y] < 0) continue;
              ks[x * m + y] += w * (vs[x] * vs[y] * inv_rho2 + vt[x] * vt[y] * inv_l2 +
                                    ang * v[x] * v[y]);
            }
          }
        }
      }
      const int m = nb * nb;
      for (int x = 0; x < m; ++x) {
        if (dof[x] < 0) continue;
        for (int y = x; y < m; ++y) {
          if (dof[y] < 0) continue;
          const double val = ks[x * m + y];
          triplets.emplace_back(dof[x], dof[y], val);
          if (y != x) triplets.emplace_back(dof[y], dof[x], val);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> k(count, count);
  k.setFromTriplets(triplets.begin(), triplets.end());

  // boundary mass on s = 1
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(boundary, boundary);
  for (int ej = 0; ej < et; ++ej) {
    for (std::size_t qt = 0; qt < nq; ++qt) {
      const ThetaPoint& t = tpts[ej * nq + qt];
      const double lam = std::sinh(t.rho);
      const double w = std::sqrt(t.drho * t.drho + lam * lam) *
                       hypgeo::sinh_power(t.rho, n - 2) * t.sin_pow * t.weight;
      for (int a = 0; a < nb; ++a) {
        const int da = at(ns - 1, ej * p + a);
        if (da < 0) continue;
        for (int b = 0; b < nb; ++b) {
          const int db = at(ns - 1, ej * p + b);
          if (db < 0) continue;
          mass(da - interior, db - interior) += w * ref.phi[qt][a] * ref.phi[qt][b];
        }
      }
    }
  }

  // Dirichlet-to-Neumann reduction
  const Eigen::SparseMatrix<double> kii = k.topLeftCorner(interior, interior);
  const Eigen::MatrixXd kib = Eigen::MatrixXd(k.block(0, interior, interior, boundary));
  Eigen::MatrixXd schur = Eigen::MatrixXd(k.bottomRightCorner(boundary, boundary));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kii);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError("steklov: interior stiffness is not positive definite (sector " +
                         std::to_string(l) + ")");
  }
  schur -= kib.transpose() * ldlt.solve(kib);
  schur = 0.5 * (schur + schur.transpose()).eval();

  // l = 0: work on the mass-orthogonal complement of constants
  Eigen::MatrixXd basis;
  if (l == 0) {
    const Eigen::VectorXd c = mass * Eigen::VectorXd::Ones(boundary);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ();
    basis = q.rightCols(boundary - 1);
  } else {
    basis = Eigen::MatrixXd::Identity(boundary, boundary);
  }
  const Eigen::MatrixXd sr = basis.transpose() * schur * basis;
  const Eigen::MatrixXd mr = basis.transpose() * mass * basis;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sr, mr);
  if (eig.info() != Eigen::Success) throw NumericalError("steklov: dense eigensolver failed");

  SectorSpectrum out;
  out.sector = l;
  out.multiplicity = sector_multiplicity(dim, l);
  const int keep = std::min<int>(options.count, static_cast<int>(sr.rows()));
  for (int i = 0; i < keep; ++i) {
    const double v = eig.eigenvalues()(i);
    if (!(v > 0.0)) {
      throw NumericalError("steklov: non-positive eigenvalue " + std::to_string(v) + " in sector " +
                           std::to_string(l));
    }
    out.eigenvalues.push_back(v);
  }
  out.traces = basis * eig.eigenvectors().leftCols(keep);
  out.trace_theta = std::move(trace_theta);
  out.mass = std::move(mass);
  return out;
}

inline SteklovSpectrum solve(const RadialProfile& profile, const std::vector<int>& sectors,
                             const SteklovOptions& options = {}) {
  SteklovSpectrum spec;
  spec.dim = profile.dim();
  for (int l : sectors) spec.sectors.push_back(solve_sector(profile, l, options));
  return spec;
}

/// Sectors {0, 1} carry sigma_1.
inline double sigma1(const RadialProfile& profile, const SteklovOptions& options = {}) {
  return solve(profile, {0, 1}, options).sigma1();
}

inline double sigma1_exact_ball(const Dimension& dim, double r) {
  return GFunction(dim).sigma1_ball(r);
}

/// sum_{i=1}^{k} 1/sigma_i, k = n-1 by default.
inline double harmonic_mean_lhs(const SteklovSpectrum& spectrum, int k = 0) {
  if (k <= 0) k = spectrum.dim.n - 1;
  double sum = 0.0;
  for (double v : spectrum.expanded(static_cast<std::size_t>(k))) sum += 1.0 / v;
  return sum;
}

struct TestFunctionBound {
  double energy = 0.0;     // int_Omega (g')^2 + (n-1) g^2 / lambda^2 dv
  double boundary = 0.0;   // int_Sigma g^2 dmu
  double bound() const { return energy / boundary; }
};

/// Rayleigh-quotient data of the test functions g(r) x_i / r about the
/// current origin.  A valid upper bound for sigma_1 when int_Sigma g x_i / r
/// vanishes, i.e. after recentring with weight g(t)/t.
inline TestFunctionBound test_function_terms(const RadialProfile& profile,
                                             QuadratureSize size = {}) {
  const GFunction g(profile.dim());
  TestFunctionBound out;
  out.energy = bulk_integral(profile, [&](double r) { return g.energy_density(r); }, size);
  out.boundary = boundary_integral(
      profile, [&](const SurfacePoint& s) { const double v = g(s.rho); return v * v; }, size);
  return out;
}

inline double test_function_bound(const RadialProfile& profile, QuadratureSize size = {}) {
  return test_function_terms(profile, size).bound();
}

inline void write_spectrum_csv(std::ostream& os, const SteklovSpectrum& spectrum) {
  os << "sector,index,eigenvalue,multiplicity\n";
  const auto old = os.precision(17);
  for (const auto& s : spectrum.sectors) {
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      os << s.sector << "," << i << "," << s.eigenvalues[i] << "," << s.multiplicity << "\n";
    }
  }
  os.precision(old);
}

}  // namespace weinstock
