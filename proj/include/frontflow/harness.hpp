#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frontflow/chain.hpp"
#include "frontflow/front_ode.hpp"
#include "frontflow/front_tracking.hpp"
#include "frontflow/potential.hpp"

namespace frontflow {

/// Malformed or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialSpec {
  std::string family = "double_well";
  int theta = 2;
  std::vector<double> wells;  ///< polynomial family only
  double scale = 1.0;
  Potential make() const;
};

/// Points of given signed multiplicity, split into |m| fronts at each offset.
struct MultiplicitySpec {
  std::vector<double> points;
  std::vector<int> multiplicities;
  int left_label = 0;
  std::vector<double> offsets{1e-2, 1e-3, 1e-4};
};

struct RunConfig {
  std::string experiment;
  PotentialSpec potential;
  std::vector<double> eps{0.01};
  std::optional<ChainSpec> chain;
  std::optional<MultiplicitySpec> multiplicity;
  double s_max = 0.0;  ///< 0 selects an experiment default
  std::size_t samples = 200;
  double cells_per_eps = 16.0;
  double margin = 0.0;  ///< 0 selects max(1, 5 * largest gap) + 0.5
  double ode_tol = 1e-8;
  /// Coupling prefactor; unset means 2^omega, resolve_prefactor measures it.
  std::optional<double> prefactor;
  bool resolve_prefactor = false;
  double event_window = 0.02;  ///< half-width of event masks, fraction of S_max
  double half_gap = 0.5;       ///< r of the plateau pair
  double relax_time = 1.0;     ///< physical relaxation time before plateau readout
  std::string output_dir = "out";
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"constants",    "ode_only",       "pde_vs_ode",          "annihilation",
                                              "splitting",    "speed_scaling",  "discrepancy_plateau", "quantization"};
  return names;
}

/// Validates against the shipped schema rules; throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  double exponent_stderr = 0.0;
  std::size_t samples = 0;
};

/// Least squares of log y on log x. Throws std::invalid_argument on fewer
/// than min_samples points or non-positive data.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_samples = 5);

/// Front positions against s, shared form of tracked PDE output and ODE runs.
/// A sample with `merging` set carries no positions.
struct Curve {
  std::vector<double> s;
  std::vector<std::vector<double>> positions;
  std::vector<char> merging;
  std::vector<double> events;  ///< collision times
};

Curve curve_from_tracked(const std::vector<TrackedFronts>& series, double omega);
Curve curve_from_trajectory(const Trajectory& trajectory, const std::vector<double>& times);

/// First collision of a tracked series: the attractive gap^{omega+2} of the
/// last clean samples is extrapolated to zero. Infinity without a collision.
double tracked_collision_time(const std::vector<TrackedFronts>& series, double omega);

struct ComparisonReport {
  double sup_error = 0.0;
  std::vector<double> per_front;  ///< indexed by position in the initial chain ordering
  std::size_t compared = 0;
  std::size_t masked = 0;
  /// Unmasked samples where the two curves disagree on the front count.
  std::size_t count_mismatch = 0;
  double window = 0.0;
  double s_col_a = 0.0;
  double s_col_b = 0.0;
  double collision_rel_error = 0.0;  ///< NaN unless both curves have events
};

/// Sup over common samples of |a_k - b_k|. Samples within `window` of any
/// event of either curve, or marked merging, are masked; unmasked samples
/// with different front counts are counted but not compared. Throws
/// std::invalid_argument if the sample times differ.
ComparisonReport compare_trajectories(const Curve& a, const Curve& b, double window);

struct CriterionStatus {
  int id = 0;
  std::string name;
  std::string status = "skipped";  ///< pass | fail | skipped
  nlohmann::json metrics = nlohmann::json::object();
};

struct ExperimentResult {
  std::string experiment;
  std::vector<CriterionStatus> criteria;  ///< ids 1..10
  nlohmann::json details = nlohmann::json::object();
  std::string output_dir;
  bool failed() const;
  nlohmann::json summary() const;
};

/// Runs the named experiment, writes artifacts under
/// <output_dir>/<experiment>[/<eps>] and <output_dir>/summary.json.
ExperimentResult run_experiment(const RunConfig& config);

/// theta, omega, A, B and the front energies of the double and triple wells.
nlohmann::json constants_json(int theta);

/// Coupling prefactor measured from the PDE: the pair {0,1,0} at half-gap r
/// relaxes for physical time `relax`, then its velocity gives
/// P = S |a'| g^{omega+1} / (lambda^{-1/(theta-1)} A). Memoized per potential and eps.
struct PrefactorEstimate {
  double measured = 0.0;
  double resolved = 0.0;  ///< nearest of 2^omega and 2^{omega+1} in log scale
  double gap = 0.0;
  double velocity = 0.0;
};
PrefactorEstimate estimate_prefactor(const Potential& potential, double eps, double r = 0.5, double relax = 1.0,
                                     double cells_per_eps = 16.0);

/// Writes an SVG line plot next to every CSV under dir; returns the count.
std::size_t plot_directory(const std::string& dir);

}  // namespace frontflow
