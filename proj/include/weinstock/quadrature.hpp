#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "weinstock/error.hpp"

namespace weinstock::quad {

/// Nodes and weights of a fixed quadrature rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    abs_sum += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half), abs_sum * std::abs(half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b].  Stops when the summed
/// error estimate is below rel_tol times the integral (or a round-off floor
/// relative to the L1 norm of the integrand), or after max_panels panels.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-14, int max_panels = 2000) {
  if (a == b) return 0.0;
  std::vector<detail::Panel> heap;
  heap.reserve(64);
  heap.push_back(detail::kronrod15(f, a, b));
  double value = heap.front().value;
  double error = heap.front().error;
  double l1_total = heap.front().l1;
  const double floor = 50.0 * std::numeric_limits<double>::epsilon();
  while (error > std::max(rel_tol * std::abs(value), floor * l1_total) &&
         static_cast<int>(heap.size()) < max_panels) {
    std::pop_heap(heap.begin(), heap.end());
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Panel left = detail::kronrod15(f, worst.a, mid);
    const detail::Panel right = detail::kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1_total += left.l1 + right.l1 - worst.l1;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    if (std::abs(mid - worst.a) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(mid)) break;
  }
  // Re-sum to drop the drift of the running updates.
  value = 0.0;
  for (const auto& p : heap) value += p.value;
  if (!std::isfinite(value)) {
    throw NumericalError("adaptive quadrature produced a non-finite value");
  }
  return value;
}

namespace detail {

// Legendre P_q(x) and P_q'(x) by the three-term recurrence.
inline void legendre(int q, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (q == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= q; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = q * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

/// Gauss-Legendre rule with q points on [-1, 1].
inline Rule gauss_legendre(int q) {
  if (q < 1) throw DomainError("gauss_legendre: need at least one point");
  Rule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double p = 0.0;
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(q, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    detail::legendre(q, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[q - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
  return rule;
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule gauss_legendre(int q, double a, double b) {
  Rule rule = gauss_legendre(q);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.nodes[i] = a + half * (rule.nodes[i] + 1.0);
    rule.weights[i] *= half;
  }
  return rule;
}

/// Gauss-Jacobi rule for the symmetric weight (1 - x^2)^alpha on [-1, 1],
/// alpha > -1, built with the Golub-Welsch eigenvalue method.
inline Rule gauss_jacobi(int q, double alpha) {
  if (q < 1) throw DomainError("gauss_jacobi: need at least one point");
  if (!(alpha > -1.0)) throw DomainError("gauss_jacobi: alpha must exceed -1");
  if (alpha == 0.0) return gauss_legendre(q);
  Rule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  if (alpha == -0.5) {
    for (int j = 0; j < q; ++j) {
      rule.nodes[j] = -std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * q));
      rule.weights[j] = std::numbers::pi / q;
    }
    return rule;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double beta = k * (k + 2.0 * alpha) /
                        ((2.0 * k + 2.0 * alpha + 1.0) * (2.0 * k + 2.0 * alpha - 1.0));
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(alpha + 1.0) /
                     std::tgamma(alpha + 1.5);
  for (int j = 0; j < q; ++j) {
    rule.nodes[j] = eig.eigenvalues()(j);
    const double v0 = eig.eigenvectors()(0, j);
    rule.weights[j] = mu0 * v0 * v0;
  }
  return rule;
}

/// The p + 1 Gauss-Lobatto-Legendre points on [-1, 1], ascending.
inline std::vector<double> gauss_lobatto_nodes(int p) {
  if (p < 1) throw DomainError("gauss_lobatto_nodes: order must be positive");
  std::vector<double> x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  for (int j = 1; j < p; ++j) {
    double r = -std::cos(std::numbers::pi * j / p);
    for (int it = 0; it < 100; ++it) {
      double lp = 0.0;
      double dlp = 0.0;
      detail::legendre(p, r, lp, dlp);
      // Legendre ODE: (1 - x^2) P'' = 2x P' - p(p+1) P.
      const double d2 = (2.0 * r * dlp - p * (p + 1.0) * lp) / (1.0 - r * r);
      const double dr = dlp / d2;
      r -= dr;
      if (std::abs(dr) < 1e-16) break;
    }
    x[j] = r;
  }
  return x;
}

/// Lagrange basis on the given nodes evaluated at point t; fills values and
/// first derivatives.
inline void lagrange_basis(const std::vector<double>& nodes, double t, std::vector<double>& value,
                           std::vector<double>& derivative) {
  const std::size_t m = nodes.size();
  value.assign(m, 0.0);
  derivative.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double v = 1.0;
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double inv = 1.0 / (nodes[i] - nodes[j]);
      d = d * (t - nodes[j]) * inv + v * inv;
      v *= (t - nodes[j]) * inv;
    }
    value[i] = v;
    derivative[i] = d;
  }
}

}  // namespace weinstock::quad
