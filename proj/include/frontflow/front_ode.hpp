#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "frontflow/chain.hpp"
#include "frontflow/potential.hpp"
#include "frontflow/singular_profiles.hpp"

namespace frontflow {

/// 2^omega, the default coupling prefactor.
double default_prefactor(double omega);

/// Signed nearest-neighbor couplings B_{k+1/2}, k = 0..l-2, for a label path:
///   +P lambda^{-1/(theta-1)} A  for a front/anti-front pair (attraction),
///   -P lambda^{-1/(theta-1)} B  for two fronts of the same orientation,
/// with lambda taken at the well between the two fronts.
std::vector<double> build_couplings(const Potential& potential, const InteractionConstants& constants,
                                    const std::vector<int>& labels, double prefactor);

/// Everything needed to evaluate the front system for one label path.
struct FrontSystem {
  std::vector<int> labels;
  std::vector<double> masses;     ///< energy of the front crossed at each position
  std::vector<double> couplings;  ///< size() - 1 entries
  double omega = 3.0;

  std::size_t size() const { return masses.size(); }
};

/// Potential, interaction constants, front energies and the coupling prefactor.
class FrontModel {
 public:
  /// A non-finite prefactor selects default_prefactor(omega).
  explicit FrontModel(const Potential& potential,
                      double prefactor = std::numeric_limits<double>::quiet_NaN());
  FrontModel(const Potential& potential, const InteractionConstants& constants, double prefactor);

  const Potential& potential() const { return potential_; }
  const InteractionConstants& constants() const { return constants_; }
  double prefactor() const { return prefactor_; }
  double omega() const { return constants_.omega; }
  double mass(std::size_t transition) const { return masses_.at(transition); }

  /// Validates the labels and assembles masses and couplings.
  FrontSystem system(const std::vector<int>& labels) const;

 private:
  Potential potential_;
  InteractionConstants constants_;
  double prefactor_;
  std::vector<double> masses_;
};

/// Velocities from S_k a_k' = B_{k+1/2} g_{k+1/2}^{-(omega+1)} - B_{k-1/2} g_{k-1/2}^{-(omega+1)}.
/// Throws std::domain_error on a non-positive gap.
std::vector<double> rhs(const FrontSystem& system, const std::vector<double>& positions);

/// F = sum_k -B_{k+1/2} g_{k+1/2}^{-omega} / omega, so that S_k a_k' = -dF/da_k.
double lyapunov_F(const FrontSystem& system, const std::vector<double>& positions);
std::vector<double> grad_F(const FrontSystem& system, const std::vector<double>& positions);

/// Minimal gap over attractive pairs (minus) and repulsive pairs (plus);
/// infinity when there is no pair of that kind.
double min_attractive_gap(const FrontSystem& system, const std::vector<double>& positions);
double min_repulsive_gap(const FrontSystem& system, const std::vector<double>& positions);

struct OdeOptions {
  double tol = 1e-8;
  std::size_t max_steps = 5'000'000;
  /// Extra cap on the step size; infinity leaves only the built-in cap.
  double max_step = std::numeric_limits<double>::infinity();
};

struct TrajectorySample {
  double s = 0.0;
  std::vector<double> positions;
  std::vector<double> velocities;
  double F = 0.0;
};

/// Stretch of the trajectory with a fixed label path.
struct TrajectorySegment {
  FrontSystem system;
  double s_begin = 0.0;
  double s_end = 0.0;
  double g_stop = 0.0;
  std::vector<TrajectorySample> samples;
};

struct CollisionEvent {
  double s = 0.0;                    ///< collision time
  std::vector<std::size_t> removed;  ///< indices in the pre-collision chain
  double location = 0.0;             ///< weighted mean of the colliding cluster
  std::vector<int> labels_before;
  std::vector<int> labels_after;
  /// Index of the surviving front in the new chain, or -1 if the cluster vanished.
  int survivor = -1;
};

class Trajectory {
 public:
  std::vector<TrajectorySegment> segments;
  std::vector<CollisionEvent> events;
  double s_final = 0.0;

  /// Segment in force at s; at an event time the post-collision segment.
  const TrajectorySegment& segment_at(double s) const;
  /// Positions at s by cubic Hermite interpolation between accepted steps.
  ChainSpec state_at(double s) const;
  std::size_t front_count_at(double s) const { return segment_at(s).system.size(); }
  /// First collision time, or infinity.
  double first_collision() const;
};

/// Adaptive Dormand-Prince 5(4) integration of the front system up to s_end.
/// Attractive pairs closer than the segment's g_stop are finished with the
/// two-body law and removed; integration resumes with the reduced chain.
/// Throws std::runtime_error on step-size underflow or a collapsing repulsive gap.
Trajectory integrate(const FrontModel& model, const ChainSpec& chain, double s_end,
                     const OdeOptions& options = {});

/// Replaces each point of multiplicity m by |m| fronts at
/// a + offset * (p - (|m|-1)/2), p = 0..|m|-1, stepping the label by sign(m).
/// Points with m = 0 are dropped. Throws std::invalid_argument if the label
/// path leaves [0, wells).
ChainSpec split_initial(const std::vector<double>& points, const std::vector<int>& multiplicities,
                        int left_label, double offset, std::size_t wells);

/// Maximal run of consecutive fronts whose neighboring pairs all attract or all repel.
struct MaximalChain {
  bool attractive = false;
  std::size_t first = 0;  ///< front indices, inclusive
  std::size_t last = 0;
};
std::vector<MaximalChain> chain_decompose(const ChainSpec& chain);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

/// Affine fits of d_minus^{omega+2} and d_plus^{omega+2} against s over the
/// first segment of a trajectory.
struct EnvelopeReport {
  bool has_attractive = false;
  bool has_repulsive = false;
  AffineFit minus;
  AffineFit plus;
  /// d_minus slope < 0 < d_plus slope for the kinds present.
  bool consistent = false;
  /// No collision up to the end of the run (pure repulsion).
  bool unbounded = false;
};
/// Throws std::invalid_argument when the first segment has fewer than 20 samples.
EnvelopeReport envelope_check(const Trajectory& trajectory);

/// Collision time of an isolated attractive pair.
double two_body_collision_time(double gap, double coupling, double mass1, double mass2, double omega);
/// Gap of an isolated pair at time s (coupling > 0 attracts).
double two_body_gap(double gap0, double coupling, double mass1, double mass2, double omega, double s);

/// CSV with columns s, l, a_1..a_L, padded with NaN after fronts disappear.
void write_trajectory_csv(const Trajectory& trajectory, const std::vector<double>& times,
                          const std::string& path);
void write_events_json(const Trajectory& trajectory, const std::string& path);

}  // namespace frontflow
