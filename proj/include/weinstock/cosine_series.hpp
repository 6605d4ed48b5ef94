#pragma once

// Even trigonometric interpolation on [0, pi].  A function is stored as
//   f(theta) = sum_{k<N} a_k cos(k theta)
// interpolating values at theta_j = j pi / (N - 1).  Evenness about both
// poles makes f'(0) = f'(pi) = 0 automatic.  Derivatives are evaluated in
// x = cos(theta) through Chebyshev recurrences, so f'/sin(theta) stays finite
// at the poles.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "weinstock/error.hpp"

namespace weinstock {

class CosineSeries {
 public:
  struct Eval {
    double value = 0.0;
    double d1 = 0.0;            // df/dtheta
    double d1_over_sin = 0.0;   // (df/dtheta)/sin(theta), regular at the poles
    double d2 = 0.0;            // d^2f/dtheta^2
  };

  CosineSeries() = default;

  static std::vector<double> nodes(std::size_t count) {
    if (count < 2) throw DomainError("CosineSeries: need at least two nodes");
    std::vector<double> theta(count);
    for (std::size_t j = 0; j < count; ++j) {
      theta[j] = std::numbers::pi * static_cast<double>(j) / static_cast<double>(count - 1);
    }
    theta.back() = std::numbers::pi;
    return theta;
  }

  /// Interpolate node values (DCT-I).
  static CosineSeries from_values(const std::vector<double>& values) {
    const std::size_t count = values.size();
    if (count < 2) throw DomainError("CosineSeries: need at least two nodes");
    const std::size_t m = count - 1;
    CosineSeries s;
    s.a_.assign(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
      double sum = 0.0;
      for (std::size_t j = 0; j <= m; ++j) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        // cos(pi j k / m) with the product reduced mod 2m for accuracy
        const std::size_t jk = (j * k) % (2 * m);
        sum += w * values[j] * std::cos(std::numbers::pi * static_cast<double>(jk) / m);
      }
      s.a_[k] = 2.0 * sum / static_cast<double>(m);
    }
    s.a_.front() *= 0.5;
    s.a_.back() *= 0.5;
    return s;
  }

  static CosineSeries from_coefficients(std::vector<double> a) {
    if (a.size() < 2) throw DomainError("CosineSeries: need at least two coefficients");
    CosineSeries s;
    s.a_ = std::move(a);
    return s;
  }

  std::size_t size() const { return a_.size(); }
  const std::vector<double>& coefficients() const { return a_; }

  Eval eval(double theta) const {
    const double x = std::cos(theta);
    const double sn = std::sin(theta);
    Eval e;
    double t_prev = 1.0, t_cur = x;       // T_0, T_1
    double u_prev = 0.0, u_cur = 1.0;     // U_{-1}, U_0
    e.value = a_[0];
    for (std::size_t k = 1; k < a_.size(); ++k) {
      const double kk = static_cast<double>(k);
      e.value += a_[k] * t_cur;
      e.d1_over_sin -= kk * a_[k] * u_cur;
      e.d2 -= kk * kk * a_[k] * t_cur;
      const double t_next = 2.0 * x * t_cur - t_prev;
      const double u_next = 2.0 * x * u_cur - u_prev;
      t_prev = t_cur;
      t_cur = t_next;
      u_prev = u_cur;
      u_cur = u_next;
    }
    e.d1 = sn * e.d1_over_sin;
    return e;
  }

  double operator()(double theta) const { return eval(theta).value; }

  /// Largest |a_k| over the top quarter of modes relative to |a_0|.
  double tail() const {
    const std::size_t start = a_.size() - std::max<std::size_t>(1, a_.size() / 4);
    double t = 0.0;
    for (std::size_t k = start; k < a_.size(); ++k) t = std::max(t, std::abs(a_[k]));
    return t / std::max(std::abs(a_[0]), 1e-300);
  }

  /// Exponential filter acting on modes above the fraction `cutoff` of the
  /// highest index: a_k *= exp(-alpha ((eta - cutoff)/(1 - cutoff))^order).
  CosineSeries filtered(double cutoff = 2.0 / 3.0, double alpha = 36.0, int order = 8) const {
    CosineSeries s = *this;
    const double top = static_cast<double>(a_.size() - 1);
    for (std::size_t k = 0; k < a_.size(); ++k) {
      const double eta = static_cast<double>(k) / top;
      if (eta > cutoff) {
        s.a_[k] *= std::exp(-alpha * std::pow((eta - cutoff) / (1.0 - cutoff), order));
      }
    }
    return s;
  }

  std::vector<double> sample(const std::vector<double>& theta) const {
    std::vector<double> v(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) v[i] = (*this)(theta[i]);
    return v;
  }

  /// Matrices mapping node values to d/dtheta, (d/dtheta)/sin, d^2/dtheta^2
  /// at the same nodes.
  struct Differentiation {
    Eigen::MatrixXd d1, d1_over_sin, d2;
  };

  static Differentiation differentiation(std::size_t count) {
    Differentiation out;
    out.d1.resize(count, count);
    out.d1_over_sin.resize(count, count);
    out.d2.resize(count, count);
    const auto theta = nodes(count);
    std::vector<double> unit(count, 0.0);
    for (std::size_t c = 0; c < count; ++c) {
      unit.assign(count, 0.0);
      unit[c] = 1.0;
      const CosineSeries s = from_values(unit);
      for (std::size_t r = 0; r < count; ++r) {
        const Eval e = s.eval(theta[r]);
        out.d1(r, c) = e.d1;
        out.d1_over_sin(r, c) = e.d1_over_sin;
        out.d2(r, c) = e.d2;
      }
    }
    return out;
  }

 private:
  std::vector<double> a_;
};

}  // namespace weinstock
