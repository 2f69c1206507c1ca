#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "frontflow/chain.hpp"
#include "frontflow/field.hpp"
#include "frontflow/potential.hpp"
#include "frontflow/stationary_fronts.hpp"

namespace frontflow {

/// Maximal run of nodes first..last where the field stays at least mu0 away
/// from every well.
struct FrontInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Front set of a field. Runs separated by less than merge_eps * eps are
/// merged. A non-finite mu0 selects the potential's mu0.
std::vector<FrontInterval> front_set(const Potential& potential, const Field& field,
                                     double mu0 = std::numeric_limits<double>::quiet_NaN(),
                                     double merge_eps = 3.0);

struct TrackedPoint {
  double a = 0.0;
  int transition = 0;  ///< i(k): the front connects wells i and i+1
  Orientation orientation = Orientation::plus;
};

struct TrackedFronts {
  double s = 0.0;
  std::vector<FrontInterval> intervals;
  std::vector<TrackedPoint> points;
  /// Well labels between consecutive points, starting with the well at the
  /// left end of the domain.
  std::vector<int> labels;
  /// Intervals without a clean crossing pattern (collision in progress).
  std::vector<std::size_t> ambiguous;
  /// Label path ends in the well found at the right end of the domain.
  bool consistent = true;
  /// Minimal gap overall, between repulsive pairs (plus) and between
  /// attractive pairs (minus); 2L (L = half the domain length) when no such
  /// pair exists.
  double d_min = 0.0;
  double d_min_plus = 0.0;
  double d_min_minus = 0.0;

  bool merging() const { return !ambiguous.empty(); }
  std::size_t size() const { return points.size(); }
  ChainSpec chain() const;
};

/// Front points of a field: in each front-set interval, the crossings of the
/// separators are located by bisection on a local cubic interpolant, the
/// orientation is the sign of v_x there and the label path comes from the
/// flanking wells. Intervals with no crossing, two crossings of one
/// separator or an inconsistent path are reported in `ambiguous`.
TrackedFronts front_points(const Potential& potential, const Field& field,
                           double mu0 = std::numeric_limits<double>::quiet_NaN());

/// For each tracked front, sup over [a_k - delta, a_k + delta] of
///   |v - zeta((x - a_k)/eps)| + eps |v' - zeta'((x - a_k)/eps)/eps|.
/// Throws std::invalid_argument if windows overlap or leave the domain.
std::vector<double> wpi_distance(const ProfileSet& profiles, const Field& field, const TrackedFronts& tracked,
                                 double delta);

struct WpoReport {
  double energy = 0.0;  ///< energy outside the windows
  double scale = 0.0;   ///< (eps / delta)^omega
  double ratio = 0.0;
};
WpoReport wpo_energy(const Potential& potential, const Field& field, const TrackedFronts& tracked, double delta);

/// Columns s, l, merging, d_min, d_min_plus, d_min_minus, then a_k, i_k,
/// dag_k per front (empty past the current front count).
void write_tracked_csv(const std::vector<TrackedFronts>& series, const std::string& path);

}  // namespace frontflow
