#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace frontflow {

/// Uniform grid on [x_min, x_max] with n nodes (both endpoints included).
struct Grid1D {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n = 64;

  Grid1D() = default;
  Grid1D(double lo, double hi, std::size_t count) : x_min(lo), x_max(hi), n(count) {
    if (!(hi > lo)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
    if (count < 64) throw std::invalid_argument("Grid1D: at least 64 nodes are required");
  }

  /// Grid with spacing at most h covering [lo, hi].
  static Grid1D with_spacing(double lo, double hi, double h);

  double spacing() const { return (x_max - x_min) / double(n - 1); }
  /// Measured from the nearer end, so a grid symmetric about 0 has exactly
  /// mirrored nodes.
  double x(std::size_t j) const {
    return 2 * j < n ? x_min + spacing() * double(j) : x_max - spacing() * double(n - 1 - j);
  }
  double length() const { return x_max - x_min; }
};

/// Discretized solution v_eps on a grid, stamped with physical time t and
/// renormalized time s = eps^omega t.
struct Field {
  Grid1D grid;
  std::vector<double> values;
  double eps = 0.01;
  double t_phys = 0.0;
  double s = 0.0;

  double h() const { return grid.spacing(); }
  std::size_t size() const { return values.size(); }
};

}  // namespace frontflow
