#pragma once

// Independent reference computations for the test suites.  Nothing here
// calls into the library's quadrature or special-function code.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Composite 20-point Gauss-Legendre in long double with `panels` equal
/// panels.  Nodes are generated here by Newton on P_20.
inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, int panels = 64) {
  constexpr int q = 20;
  static const auto rule = [] {
    std::vector<std::pair<long double, long double>> r;
    for (int i = 0; i < q; ++i) {
      long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (q + 0.5L));
      long double dp = 0;
      for (int it = 0; it < 100; ++it) {
        long double p0 = 1, p1 = x;
        for (int k = 2; k <= q; ++k) {
          long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = q * (x * p1 - p0) / (x * x - 1);
        long double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-19L) break;
      }
      r.emplace_back(x, 2 / ((1 - x * x) * dp * dp));
    }
    return r;
  }();
  long double sum = 0;
  const long double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const long double lo = a + p * h;
    for (const auto& [x, w] : rule) sum += w * f(lo + 0.5L * h * (x + 1));
  }
  return 0.5L * h * sum;
}

/// g(r) = int_0^r sinh^{n-1} / sinh^{n-1}(r), by composite Gauss-Legendre.
inline double g(int n, double r) {
  const long double s = std::sinh(static_cast<long double>(r));
  return static_cast<double>(integrate(
      [&](long double t) { return std::pow(std::sinh(t) / s, n - 1); }, 0, r, 256));
}

/// Closed-form antiderivative int_0^r sinh^m by the reduction formula, long
/// double.  Accurate for r of order one and above.
inline long double sinh_power_integral(int m, long double r) {
  if (m == 0) return r;
  if (m == 1) return std::cosh(r) - 1;
  return std::pow(std::sinh(r), m - 1) * std::cosh(r) / m -
         static_cast<long double>(m - 1) / m * sinh_power_integral(m - 2, r);
}

/// Central finite-difference derivative with Richardson extrapolation.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double step) { return (f(x + step) - f(x - step)) / (2 * step); };
  return (4 * d(h / 2) - d(h)) / 3;
}

/// Log-spaced grid of `count` points on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  }
  return out;
}

}  // namespace oracle
