#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace frontflow::detail {

/// Root of g(x) = target for g increasing on [a, b] with g(a) <= target <= g(b).
/// Newton steps from the secant guess, falling back to bisection whenever a
/// step leaves the current bracket. A negative tol selects 1e-14 * max(1, |target|).
template <class G, class DG>
double solve_monotone(G g, DG dg, double a, double b, double target, double tol = -1.0) {
  double ga = g(a) - target, gb = g(b) - target;
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if (ga > 0.0 || gb < 0.0) {
    // Tolerate roundoff at the ends of the bracket.
    return std::abs(ga) < std::abs(gb) ? a : b;
  }
  double x = a - ga * (b - a) / (gb - ga);
  if (!(x > a && x < b)) x = 0.5 * (a + b);
  if (tol < 0.0) tol = 1e-14 * std::max(1.0, std::abs(target));
  for (int it = 0; it < 200; ++it) {
    const double gx = g(x) - target;
    if (std::abs(gx) <= tol) return x;
    if (gx < 0.0) a = x; else b = x;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
      return x;
    const double d = dg(x);
    double xn = (d > 0.0 && std::isfinite(d)) ? x - gx / d : 0.5 * (a + b);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (xn == x) return x;
    x = xn;
  }
  return x;
}

/// Solves a general tridiagonal system in place (Thomas algorithm).
/// lower[0] and upper[n-1] are ignored. rhs is overwritten with the solution.
inline void solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag,
                              const std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

/// Tridiagonal solve by elimination from both ends towards the middle row
/// (twisted factorization). For odd n and a system that is symmetric under
/// i -> n-1-i the two halves see identical floating-point operations, so
/// mirror-symmetric data give an exactly mirror-symmetric solution.
inline void solve_tridiagonal_twisted(const std::vector<double>& lower, std::vector<double> diag,
                                      const std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (n < 3) {
    solve_tridiagonal(lower, std::move(diag), upper, rhs);
    return;
  }
  const std::size_t m = n / 2;
  for (std::size_t i = 1; i < m; ++i) {
    if (diag[i - 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    const double f = lower[i] / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i > m; --i) {
    if (diag[i + 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    const double g = upper[i] / diag[i + 1];
    diag[i] -= g * lower[i + 1];
    rhs[i] -= g * rhs[i + 1];
  }
  const double f = lower[m] / diag[m - 1], g = upper[m] / diag[m + 1];
  const double dm = diag[m] - (f * upper[m - 1] + g * lower[m + 1]);
  if (dm == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
  rhs[m] = (rhs[m] - (f * rhs[m - 1] + g * rhs[m + 1])) / dm;
  for (std::size_t i = m; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  for (std::size_t i = m + 1; i < n; ++i) rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / diag[i];
}

}  // namespace frontflow::detail
