#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "frontflow/field.hpp"
#include "frontflow/potential.hpp"

namespace frontflow {

/// Nodewise energy density e = eps v_x^2 / 2 + V(v) / eps, with centered
/// differences inside and second-order one-sided differences at the ends.
std::vector<double> energy_density(const Potential& potential, const Field& field);

/// Same with a given derivative v_x at the nodes (e.g. exact for glued data).
std::vector<double> energy_density(const Potential& potential, const Field& field, const std::vector<double>& dvdx);

/// Nodewise discrepancy xi = eps v_x^2 / 2 - V(v) / eps (same differences).
std::vector<double> discrepancy_field(const Potential& potential, const Field& field);
std::vector<double> discrepancy_field(const Potential& potential, const Field& field, const std::vector<double>& dvdx);
/// eps^{-omega} xi.
std::vector<double> renormalized_discrepancy(const Potential& potential, const Field& field);

/// Trapezoid rule on the energy density.
double energy(const Potential& potential, const Field& field);
double energy(const Potential& potential, const Field& field, const std::vector<double>& dvdx);
/// Trapezoid rule on chi * e; chi is sampled at the nodes.
double localized_energy(const Potential& potential, const Field& field, const std::vector<double>& chi);

/// Energy whose weighted gradient is the scheme's right-hand side:
/// staggered differences for v_x and trapezoid weights for V. The
/// backward Euler step dissipates this functional.
double discrete_energy(const Potential& potential, const Field& field);

struct StepOptions {
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
  int max_halvings = 10;
};

struct StepInfo {
  double dt = 0.0;  ///< step actually taken
  int halvings = 0;
  int newton_iterations = 0;
};

/// One backward Euler step of v_t = v_xx - eps^{-2} V'(v) with homogeneous
/// Neumann ends (mirrored ghost nodes), Newton on the full nonlinear system
/// with a tridiagonal Jacobian. On Newton failure dt halves, at most
/// max_halvings times, then std::runtime_error. Advances t_phys and s.
Field step(const Potential& potential, const Field& field, double dt, const StepOptions& options = {},
           StepInfo* info = nullptr);

struct RunOptions {
  /// Non-finite selects eps^2 / 4.
  double dt_initial = std::numeric_limits<double>::quiet_NaN();
  double dt_max = std::numeric_limits<double>::infinity();
  /// Cap on the discrete energy decrease per step, as a fraction of the
  /// current energy (floored at energy_floor times the initial energy).
  double energy_fraction = 0.01;
  double energy_floor = 1e-3;
  /// Cap on max_j |v_j^{n+1} - v_j^n| per step; keeps fronts moving by a
  /// fraction of eps per step.
  double max_dv = 0.02;
  double growth = 1.25;
  std::size_t max_steps = 20'000'000;
  StepOptions step;
  bool keep_snapshots = true;
};

struct DiagnosticRow {
  double s = 0.0;
  double t_phys = 0.0;
  double dt = 0.0;
  double energy = 0.0;      ///< discrete energy
  double dissipation = 0.0; ///< eps * sum of h w_j (dv_j)^2 / dt so far
  double residual = 0.0;    ///< |E(t) + dissipation - E(0)| / E(0)
};

struct RunResult {
  std::vector<Field> snapshots;
  std::vector<DiagnosticRow> diagnostics;
  std::size_t steps = 0;
  double energy_identity_residual = 0.0;
  /// Largest increase of the discrete energy over an accepted step (<= 0 when monotone).
  double max_energy_increase = 0.0;
};

using SnapshotCallback = std::function<void(const Field&)>;

/// Integrates to s_max = eps^omega t. Snapshots at the requested renormalized
/// times are interpolated linearly between accepted steps; each is stored
/// (keep_snapshots) and passed to on_snapshot. Output times outside
/// [0, s_max] or not increasing raise std::invalid_argument.
RunResult run(const Potential& potential, const Field& initial, double s_max,
              const std::vector<double>& output_times_s, const RunOptions& options = {},
              const SnapshotCallback& on_snapshot = {});

/// |E(T2) + dissipation - E(T1)| / E(T1) for a completed run; 0 without steps.
double energy_identity_residual(const RunResult& result);

/// Columns x, v.
void write_snapshot_csv(const Field& field, const std::string& path);
/// Columns s, t, dt, E, dissip, residual.
void write_diagnostics_csv(const RunResult& result, const std::string& path);

}  // namespace frontflow
