#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <map>
#include <mutex>

#include "frontflow/harness.hpp"
#include "frontflow/oracles.hpp"
#include "frontflow/pgl_sim.hpp"
#include "frontflow/singular_profiles.hpp"
#include "frontflow/stationary_fronts.hpp"

namespace frontflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative tolerance shared by the collision-time target and the survivor check.
constexpr double kCollisionTolerance = 0.15;
constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kCriterionNames[10] = {"constants",           "ode_two_body",     "conservation_lyapunov",
                                         "collision_exponent",  "renormalizability", "pde_ode_convergence",
                                         "energy_quantization", "discrepancy_plateau", "annihilation",
                                         "splitting"};

std::string eps_label(double eps) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, eps);
  return std::string(buf, r.ptr);
}

fs::path make_dir(const fs::path& p) {
  fs::create_directories(p);
  return p;
}

void write_json(const json& j, const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

// NaN and infinity are not representable in JSON.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void log_line(const std::string& s) { std::clog << "[frontflow] " << s << std::endl; }

void set_status(ExperimentResult& r, int id, bool pass, json metrics) {
  auto& c = r.criteria.at(std::size_t(id - 1));
  c.status = pass ? "pass" : "fail";
  c.metrics = std::move(metrics);
}

void set_skipped(ExperimentResult& r, int id, const std::string& why) {
  auto& c = r.criteria.at(std::size_t(id - 1));
  c.status = "skipped";
  c.metrics = {{"reason", why}};
}

std::vector<double> uniform_times(double s_max, std::size_t n) {
  std::vector<double> t;
  for (std::size_t i = 0; i <= n; ++i) t.push_back(std::min(s_max, s_max * double(i) / double(n)));
  return t;
}

double max_gap(const ChainSpec& c) {
  double g = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) g = std::max(g, c.positions[k + 1] - c.positions[k]);
  return g;
}

Grid1D chain_grid(const ChainSpec& c, const RunConfig& cfg, double eps) {
  const double m = cfg.margin > 0.0 ? cfg.margin : std::max(1.0, 5.0 * max_gap(c)) + 0.5;
  return Grid1D::with_spacing(c.positions.front() - m, c.positions.back() + m, eps / cfg.cells_per_eps);
}

template <class F>
auto with_context(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(what + ": " + e.what());
  }
}

struct PdeRun {
  double eps = 0.0;
  double h = 0.0;
  std::vector<TrackedFronts> tracked;
  std::size_t steps = 0;
  double energy_residual = 0.0;
  double max_energy_increase = 0.0;
  double s_col = kInf;
};

PdeRun simulate(const Potential& p, const Field& init, double s_max, const std::vector<double>& times,
                const fs::path& dir) {
  make_dir(dir);
  write_snapshot_csv(init, (dir / "snapshot_initial.csv").string());
  PdeRun r;
  r.eps = init.eps;
  r.h = init.h();
  RunOptions o;
  o.keep_snapshots = false;
  Field last = init;
  const RunResult res = run(p, init, s_max, times, o, [&](const Field& f) {
    r.tracked.push_back(front_points(p, f));
    last = f;
  });
  r.steps = res.steps;
  r.energy_residual = res.energy_identity_residual;
  r.max_energy_increase = res.max_energy_increase;
  r.s_col = tracked_collision_time(r.tracked, p.omega());
  write_snapshot_csv(last, (dir / "snapshot_final.csv").string());
  write_diagnostics_csv(res, (dir / "diagnostics.csv").string());
  write_tracked_csv(r.tracked, (dir / "tracked.csv").string());
  return r;
}

json run_json(const PdeRun& r) {
  return {{"eps", r.eps},
          {"h", r.h},
          {"steps", r.steps},
          {"s_col", num(r.s_col)},
          {"energy_identity_residual", num(r.energy_residual)},
          {"max_energy_increase", num(r.max_energy_increase)}};
}

json comparison_json(const ComparisonReport& c) {
  json pf = json::array();
  for (double x : c.per_front) pf.push_back(num(x));
  return {{"sup_error", num(c.sup_error)},
          {"per_front", pf},
          {"compared", c.compared},
          {"masked", c.masked},
          {"count_mismatch", c.count_mismatch},
          {"window", num(c.window)},
          {"s_col_pde", num(c.s_col_a)},
          {"s_col_ode", num(c.s_col_b)},
          {"collision_rel_error", num(c.collision_rel_error)}};
}

double model_prefactor(const RunConfig& cfg, const Potential& p, json& details) {
  if (cfg.resolve_prefactor) {
    const double eps = *std::min_element(cfg.eps.begin(), cfg.eps.end());
    const PrefactorEstimate e = with_context("prefactor resolution", [&] {
      return estimate_prefactor(p, eps, cfg.half_gap, cfg.relax_time, cfg.cells_per_eps);
    });
    details["prefactor"] = {{"mode", "resolve"},       {"eps", eps},           {"measured", e.measured},
                            {"resolved", e.resolved}, {"gap", e.gap},          {"velocity", e.velocity}};
    return e.resolved;
  }
  const double P = cfg.prefactor ? *cfg.prefactor : default_prefactor(p.omega());
  details["prefactor"] = {{"mode", cfg.prefactor ? "fixed" : "default"}, {"resolved", P}};
  return P;
}

std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// ---------------------------------------------------------------- criteria

void criterion_constants(ExperimentResult& r) {
  const auto t0 = std::chrono::steady_clock::now();
  json per = json::array();
  double worst = 0.0;
  for (int th : {2, 3, 4}) {
    const double ea = std::abs(shooting_A(th) / compute_A(th) - 1.0);
    const double eb = std::abs(shooting_B(th) / compute_B(th) - 1.0);
    worst = std::max({worst, ea, eb});
    per.push_back({{"theta", th}, {"A_rel_err", ea}, {"B_rel_err", eb}});
  }
  const double ra = std::abs(compute_A(2) / std::pow(singular_integral_I(2), 4) - 1.0);
  const double rb = std::abs(compute_B(2) / std::pow(singular_integral_J(2), 4) - 1.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool runtime_ok = secs < 5.0;
  set_status(r, 1, worst <= 1e-8 && ra <= 1e-10 && rb <= 1e-10 && runtime_ok,
             {{"shooting", per}, {"max_rel_err", worst}, {"quadrature_A_rel_err", ra},
              {"quadrature_B_rel_err", rb}, {"runtime_under_5s", runtime_ok}});
}

void criterion_two_body(ExperimentResult& r, const RunConfig& cfg, double P) {
  const auto t0 = std::chrono::steady_clock::now();
  const int th = cfg.potential.theta;
  OdeOptions opt;
  opt.tol = cfg.ode_tol;

  const FrontModel dm(make_double_well(th), P);
  const FrontSystem ds = dm.system({0, 1, 0});
  const double S = ds.masses[0], B = ds.couplings[0], w = ds.omega;
  const double smax = two_body_collision_time(1.0, B, S, S, w);
  const Trajectory ta = integrate(dm, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, 2.0 * smax, opt);
  const double smax_err = ta.events.empty() ? kInf : std::abs(ta.events[0].s / smax - 1.0);
  double gap_att = 0.0;
  for (const auto& q : ta.segments[0].samples) {
    if (q.s > 0.9 * smax) break;
    const double exact = two_body_gap(1.0, B, S, S, w, q.s);
    gap_att = std::max(gap_att, std::abs((q.positions[1] - q.positions[0]) / exact - 1.0));
  }

  const FrontModel tm(make_triple_well(th), P);
  const FrontSystem ts = tm.system({0, 1, 2});
  const Trajectory tr = integrate(tm, ChainSpec{{-0.1, 0.1}, {0, 1, 2}}, 0.5, opt);
  double gap_rep = 0.0;
  for (const auto& q : tr.segments[0].samples) {
    const double exact = two_body_gap(0.2, ts.couplings[0], ts.masses[0], ts.masses[1], ts.omega, q.s);
    gap_rep = std::max(gap_rep, std::abs((q.positions[1] - q.positions[0]) / exact - 1.0));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool runtime_ok = secs < 1.0;
  set_status(r, 2, smax_err <= 1e-6 && gap_att <= 1e-6 && gap_rep <= 1e-6 && tr.events.empty() && runtime_ok,
             {{"tol", cfg.ode_tol}, {"S_max", smax}, {"S_max_rel_err", num(smax_err)},
              {"attractive_gap_rel_err", gap_att}, {"repulsive_gap_rel_err", gap_rep},
              {"runtime_under_1s", runtime_ok}});
}

void criterion_conservation(ExperimentResult& r, const RunConfig& cfg, double P) {
  const FrontModel m(make_triple_well(cfg.potential.theta), P);
  const ChainSpec c{{-2.0, -1.1, 0.0, 0.4, 1.3, 2.9}, {0, 1, 0, 1, 2, 1, 0}};
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  const Trajectory t = integrate(m, c, 50.0, opt);
  const auto& seg = t.segments.front();
  double p0 = 0.0, msum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    p0 += seg.system.masses[k] * c.positions[k];
    msum += seg.system.masses[k];
  }
  const double scale = msum * (c.positions.back() - c.positions.front());
  double drift = 0.0, rise = 0.0;
  double prevF = seg.samples.front().F;
  for (const auto& q : seg.samples) {
    double pk = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) pk += seg.system.masses[k] * q.positions[k];
    drift = std::max(drift, std::abs(pk - p0) / scale);
    rise = std::max(rise, (q.F - prevF) / std::max(1.0, std::abs(prevF)));
    prevF = q.F;
  }
  set_status(r, 3, drift <= 1e-9 && rise <= 1e-12 && !t.events.empty(),
             {{"momentum_rel_drift", drift}, {"max_F_increase", rise}, {"steps", seg.samples.size()},
              {"first_event", num(t.first_collision())}});
}

void criterion_collision_exponent(ExperimentResult& r, const RunConfig& cfg, double P) {
  const FrontModel m(make_triple_well(cfg.potential.theta), P);
  const ChainSpec c{{-2.0, -0.3, 0.3, 2.5}, {0, 1, 2, 1, 0}};
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  const Trajectory t = integrate(m, c, 10.0, opt);
  if (t.events.empty()) {
    set_status(r, 4, false, {{"reason", "no collision"}});
    return;
  }
  const double sc = t.events.front().s;
  const auto& seg = t.segments.front();
  double tmin = kInf;
  for (const auto& q : seg.samples) tmin = std::min(tmin, sc - q.s);
  std::vector<double> lx, ly;
  for (const auto& q : seg.samples) {
    const double d = sc - q.s;
    if (d > 0.0 && d <= 10.0 * tmin) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(min_attractive_gap(seg.system, q.positions)));
    }
  }
  const double target = 1.0 / (m.omega() + 2.0);
  if (lx.size() < 5) {
    set_status(r, 4, false, {{"reason", "too few samples in the last decade"}, {"samples", lx.size()}});
    return;
  }
  const AffineFit f = fit_affine(lx, ly);
  set_status(r, 4, std::abs(f.slope - target) <= 0.02 * target,
             {{"slope", f.slope}, {"target", target}, {"r2", f.r2}, {"samples", f.samples}, {"S_col", sc}});
}

void criterion_renormalizability(ExperimentResult& r, const std::vector<double>& eps, const std::vector<double>& s_col,
                                 double omega) {
  if (eps.size() < 3) {
    set_skipped(r, 5, "needs at least three eps values");
    return;
  }
  std::vector<double> t_col;
  json per = json::array();
  bool all = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    t_col.push_back(s_col[i] / std::pow(eps[i], omega));
    all = all && std::isfinite(s_col[i]);
    per.push_back({{"eps", eps[i]}, {"s_col", num(s_col[i])}, {"t_col", num(t_col.back())}});
  }
  if (!all) {
    set_status(r, 5, false, {{"reason", "no collision at some eps"}, {"runs", per}});
    return;
  }
  const PowerLawFit f = fit_power_law(eps, t_col, 3);
  set_status(r, 5, std::abs(f.exponent + omega) <= 0.05 * omega,
             {{"exponent", f.exponent}, {"target", -omega}, {"exponent_stderr", f.exponent_stderr}, {"r2", f.r2},
              {"runs", per}});
}

// --------------------------------------------------------------- sweeps

struct SweepMember {
  PdeRun run;
  ComparisonReport cmp;
};

std::vector<SweepMember> pde_sweep(const RunConfig& cfg, const Potential& p, const ChainSpec& chain, double s_max,
                                   const std::vector<double>& times, const fs::path& root, const Curve* ode,
                                   double window) {
  const ProfileSet profiles(p);
  std::vector<std::future<SweepMember>> jobs;
  for (double eps : cfg.eps) {
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      return with_context(cfg.experiment + " eps=" + eps_label(eps), [&] {
        const GluedField g = glue_chain(profiles, chain, eps, chain_grid(chain, cfg, eps));
        const fs::path dir = root / eps_label(eps);
        SweepMember m;
        m.run = simulate(p, g.field, s_max, times, dir);
        if (ode) {
          m.cmp = compare_trajectories(curve_from_tracked(m.run.tracked, p.omega()), *ode, window);
          write_json(comparison_json(m.cmp), dir / "comparison.json");
        }
        log_line(cfg.experiment + " eps=" + eps_label(eps) + " done, s_col=" + std::to_string(m.run.s_col));
        return m;
      });
    }));
  }
  std::vector<SweepMember> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------- experiments

void experiment_constants(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const json c = constants_json(cfg.potential.theta);
  write_json(c, make_dir(root) / "constants.json");
  r.details["constants"] = c;
  criterion_constants(r);
}

void experiment_ode_only(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const Potential p = cfg.potential.make();
  const double P = model_prefactor(cfg, p, r.details);
  const FrontModel m(p, P);
  const ChainSpec chain = cfg.chain ? *cfg.chain
                                    : split_initial(cfg.multiplicity->points, cfg.multiplicity->multiplicities,
                                                    cfg.multiplicity->left_label, cfg.multiplicity->offsets.back(),
                                                    p.well_count());
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  double s_max = cfg.s_max;
  if (!(s_max > 0.0)) {
    const Trajectory probe = integrate(m, chain, 1e3, opt);
    s_max = std::isfinite(probe.first_collision()) ? 2.0 * probe.events.back().s : 1.0;
  }
  const Trajectory t = with_context("ode_only", [&] { return integrate(m, chain, s_max, opt); });
  make_dir(root);
  write_trajectory_csv(t, uniform_times(s_max, cfg.samples), (root / "trajectory.csv").string());
  write_events_json(t, (root / "events.json").string());
  r.details["s_max"] = s_max;
  r.details["events"] = t.events.size();
  r.details["first_collision"] = num(t.first_collision());
  criterion_two_body(r, cfg, P);
  criterion_conservation(r, cfg, P);
  criterion_collision_exponent(r, cfg, P);
}

void experiment_pde_vs_ode(const RunConfig& cfg, ExperimentResult& r, const fs::path& root, bool compare) {
  const Potential p = cfg.potential.make();
  const double P = model_prefactor(cfg, p, r.details);
  const FrontModel m(p, P);
  const ChainSpec& chain = *cfg.chain;
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  double s_max = cfg.s_max;
  const double S_ode = integrate(m, chain, s_max > 0.0 ? s_max : 1e3, opt).first_collision();
  if (!(s_max > 0.0)) {
    if (!std::isfinite(S_ode)) throw ConfigError(cfg.experiment + ": s_max is required when the ODE has no collision");
    s_max = 1.5 * S_ode;
  }
  const std::vector<double> times = uniform_times(s_max, cfg.samples);
  const Trajectory tr = integrate(m, chain, s_max, opt);
  make_dir(root);
  write_trajectory_csv(tr, times, (root / "ode_trajectory.csv").string());
  write_events_json(tr, (root / "ode_events.json").string());
  const Curve ode = curve_from_trajectory(tr, times);
  const double window = cfg.event_window * (std::isfinite(S_ode) ? S_ode : s_max);

  const auto members = pde_sweep(cfg, p, chain, s_max, times, root, compare ? &ode : nullptr, window);
  std::vector<double> eps, s_col;
  json runs = json::array();
  for (const auto& mb : members) {
    eps.push_back(mb.run.eps);
    s_col.push_back(mb.run.s_col);
    json j = run_json(mb.run);
    j["t_col"] = num(mb.run.s_col / std::pow(mb.run.eps, p.omega()));
    if (compare) j["comparison"] = comparison_json(mb.cmp);
    runs.push_back(j);
  }
  r.details["S_max_ode"] = num(S_ode);
  r.details["s_max"] = s_max;
  r.details["runs"] = runs;
  criterion_renormalizability(r, eps, s_col, p.omega());
  if (!compare) return;

  if (eps.size() < 2) {
    set_skipped(r, 6, "needs at least two eps values");
    return;
  }
  // order by decreasing eps
  std::vector<std::size_t> idx(eps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return eps[a] > eps[b]; });
  bool monotone = true;
  json errs = json::array();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& c = members[idx[i]].cmp;
    errs.push_back({{"eps", eps[idx[i]]}, {"sup_error", c.sup_error}, {"collision_rel_error", num(c.collision_rel_error)}});
    if (i > 0 && !(c.sup_error < members[idx[i - 1]].cmp.sup_error)) monotone = false;
    if (c.compared == 0) monotone = false;
  }
  const auto& finest = members[idx.back()];
  const double rel = std::isfinite(S_ode) && std::isfinite(finest.run.s_col) ? std::abs(finest.run.s_col / S_ode - 1.0)
                                                                             : kInf;
  set_status(r, 6, monotone,
             {{"sup_errors", errs}, {"strictly_decreasing", monotone}, {"S_max_ode", num(S_ode)},
              {"s_col_finest", num(finest.run.s_col)}, {"collision_rel_error_finest", num(rel)},
              {"target", kCollisionTolerance}, {"target_met", rel <= kCollisionTolerance}});
}

struct PlateauReading {
  double eps = 0.0;
  double gap = 0.0;
  double value = 0.0;
  double predicted = 0.0;
};

PlateauReading plateau(const Potential& p, const std::vector<int>& labels, double r, double eps, double relax,
                       double cells, const fs::path& csv) {
  const ChainSpec c{{-r, r}, labels};
  const double m = std::max(1.0, 10.0 * r) + 0.5;
  const GluedField g = glue_chain(p, c, eps, Grid1D::with_spacing(-r - m, r + m, eps / cells));
  const double s_rel = std::pow(eps, p.omega()) * relax;
  const Field f = run(p, g.field, s_rel, {s_rel}).snapshots.back();
  const TrackedFronts t = front_points(p, f);
  if (t.size() != 2) throw std::runtime_error("plateau: pair not resolved after relaxation");
  PlateauReading out;
  out.eps = eps;
  out.gap = t.points[1].a - t.points[0].a;
  const double mid = 0.5 * (t.points[0].a + t.points[1].a);
  const auto xi = renormalized_discrepancy(p, f);
  std::size_t j = std::size_t(std::lround((mid - f.grid.x_min) / f.h()));
  out.value = xi[j];
  const InteractionConstants k = interaction_constants(p.theta());
  const bool attractive = c.attractive(0);
  const double lambda = p.well(std::size_t(labels[1])).lambda;
  out.predicted = (attractive ? -k.A : k.B) * std::pow(lambda, -1.0 / (p.theta() - 1)) *
                  std::pow(0.5 * out.gap, -(k.omega + 1.0));
  std::ofstream os(csv);
  os.imbue(std::locale::classic());
  os << "x,xi_renorm\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.grid.x(i);
    if (x > t.points[0].a + 0.1 * out.gap && x < t.points[1].a - 0.1 * out.gap) os << x << ',' << xi[i] << '\n';
  }
  return out;
}

void experiment_plateau(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const Potential pa = cfg.potential.make();
  const Potential pr = pa.well_count() >= 3 ? pa : make_triple_well(cfg.potential.theta);
  std::vector<std::future<std::pair<PlateauReading, PlateauReading>>> jobs;
  for (double eps : cfg.eps) {
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      return with_context("discrepancy_plateau eps=" + eps_label(eps), [&] {
        const fs::path dir = make_dir(root / eps_label(eps));
        auto a = plateau(pa, {0, 1, 0}, cfg.half_gap, eps, cfg.relax_time, cfg.cells_per_eps, dir / "attractive.csv");
        auto b = plateau(pr, {0, 1, 2}, cfg.half_gap, eps, cfg.relax_time, cfg.cells_per_eps, dir / "repulsive.csv");
        log_line("discrepancy_plateau eps=" + eps_label(eps) + " done");
        return std::make_pair(a, b);
      });
    }));
  }
  json rows = json::array();
  PlateauReading fa, fb;
  double finest = kInf;
  for (auto& j : jobs) {
    const auto [a, b] = j.get();
    rows.push_back({{"eps", a.eps},
                    {"attractive", {{"gap", a.gap}, {"value", a.value}, {"predicted", a.predicted}}},
                    {"repulsive", {{"gap", b.gap}, {"value", b.value}, {"predicted", b.predicted}}}});
    if (a.eps < finest) {
      finest = a.eps;
      fa = a;
      fb = b;
    }
  }
  r.details["plateau"] = rows;

  const PrefactorEstimate e = with_context("prefactor resolution", [&] {
    return estimate_prefactor(pa, finest, cfg.half_gap, cfg.relax_time, cfg.cells_per_eps);
  });
  const double w = pa.omega();
  r.details["prefactor"] = {{"mode", "resolve"},
                            {"eps", finest},
                            {"measured", e.measured},
                            {"resolved", e.resolved},
                            {"candidates", {std::pow(2.0, w), std::pow(2.0, w + 1.0)}},
                            {"gap", e.gap},
                            {"velocity", e.velocity}};
  const double ea = std::abs(fa.value / fa.predicted - 1.0);
  const double eb = std::abs(fb.value / fb.predicted - 1.0);
  set_status(r, 8, fa.value < 0.0 && fb.value > 0.0 && ea <= 0.10 && eb <= 0.10,
             {{"eps", finest}, {"attractive_value", fa.value}, {"attractive_predicted", fa.predicted},
              {"attractive_rel_err", ea}, {"repulsive_value", fb.value}, {"repulsive_predicted", fb.predicted},
              {"repulsive_rel_err", eb}, {"resolved_prefactor", e.resolved}, {"measured_prefactor", e.measured}});
}

void experiment_quantization(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const Potential p = cfg.potential.make();
  const ProfileSet profiles(p);
  const ChainSpec& chain = *cfg.chain;
  double sum = 0.0;
  for (std::size_t k = 0; k < chain.size(); ++k) sum += profiles.energy(std::size_t(chain.transition(k)));
  make_dir(root);
  std::ofstream os(root / "quantization.csv");
  os.imbue(std::locale::classic());
  os << "eps,E,E_fd,sum_S,rel_err\n" << std::setprecision(17);
  std::vector<double> eps = sorted_desc(cfg.eps), err;
  json rows = json::array();
  for (double e : eps) {
    const GluedField g = with_context("quantization eps=" + eps_label(e),
                                      [&] { return glue_chain(profiles, chain, e, chain_grid(chain, cfg, e)); });
    const double E = energy(p, g.field, g.dvdx);
    const double Efd = energy(p, g.field);
    err.push_back(std::abs(E - sum) / sum);
    os << e << ',' << E << ',' << Efd << ',' << sum << ',' << err.back() << '\n';
    rows.push_back({{"eps", e}, {"E", E}, {"E_fd", Efd}, {"rel_err", err.back()}, {"rel_err_fd", std::abs(Efd - sum) / sum}});
  }
  r.details["sum_S"] = sum;
  r.details["quantization"] = rows;
  if (eps.size() < 2 || eps.back() > 0.01 + 1e-12) {
    set_skipped(r, 7, "needs two eps values, one of them at most 0.01");
    return;
  }
  bool ok = true, decreasing = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] <= 0.01 + 1e-12) ok = ok && err[i] <= 0.02;
    if (i > 0) decreasing = decreasing && err[i] < err[i - 1];
  }
  set_status(r, 7, ok && decreasing, {{"rows", rows}, {"within_2_percent", ok}, {"decreasing", decreasing}});
}

void experiment_annihilation(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const Potential p = cfg.potential.make();
  const double P = model_prefactor(cfg, p, r.details);
  const FrontModel m(p, P);
  const ChainSpec& chain = *cfg.chain;
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  const double S_ode = integrate(m, chain, 1e3, opt).first_collision();
  if (!std::isfinite(S_ode)) throw ConfigError("annihilation: the chain has no collision");
  const double s_max = cfg.s_max > 0.0 ? cfg.s_max : 2.5 * S_ode;
  const std::vector<double> times = uniform_times(s_max, cfg.samples);
  const Trajectory tr = integrate(m, chain, s_max, opt);
  make_dir(root);
  write_trajectory_csv(tr, times, (root / "ode_trajectory.csv").string());
  write_events_json(tr, (root / "ode_events.json").string());
  const Curve ode = curve_from_trajectory(tr, times);
  const auto members = pde_sweep(cfg, p, chain, s_max, times, root, &ode, cfg.event_window * S_ode);

  // initial index of each front in the final ODE chain (-1 for a cluster survivor)
  std::vector<int> origin(chain.size());
  for (std::size_t k = 0; k < origin.size(); ++k) origin[k] = int(k);
  for (const auto& e : tr.events) {
    std::vector<int> next;
    for (std::size_t k = 0; k < origin.size(); ++k)
      if (std::find(e.removed.begin(), e.removed.end(), k) == e.removed.end()) next.push_back(origin[k]);
    if (e.survivor >= 0) next.insert(next.begin() + e.survivor, -1);
    origin = next;
  }
  const ChainSpec ode_end = tr.state_at(s_max);

  json runs = json::array();
  const SweepMember* finest = nullptr;
  for (const auto& mb : members) {
    json j = run_json(mb.run);
    j["comparison"] = comparison_json(mb.cmp);
    runs.push_back(j);
    if (!finest || mb.run.eps < finest->run.eps) finest = &mb;
  }
  r.details["runs"] = runs;
  r.details["S_col_ode"] = S_ode;

  const auto& tk = finest->run.tracked;
  bool counts_ok = tk.front().size() == chain.size() && tk.back().size() == ode_end.size() && !tk.back().merging();
  std::size_t prev = tk.front().size();
  for (const auto& t : tk) {
    if (t.merging()) continue;
    counts_ok = counts_ok && t.size() <= prev;
    prev = t.size();
  }
  const bool labels_ok = tk.back().labels == ode_end.labels;
  // survivor agreement, relative to how far each survivor travelled
  double worst = 0.0, restart_dev = 0.0;
  json surv = json::array();
  if (counts_ok && labels_ok) {
    for (std::size_t k = 0; k < ode_end.size(); ++k) {
      const double a_pde = tk.back().points[k].a, a_ode = ode_end.positions[k];
      const double start = origin[k] >= 0 ? chain.positions[std::size_t(origin[k])] : a_ode;
      const double scale = std::max(std::abs(a_ode - start), finest->run.h);
      worst = std::max(worst, std::abs(a_pde - a_ode) / scale);
      surv.push_back({{"pde", a_pde}, {"ode", a_ode}, {"start", start}, {"rel_err", std::abs(a_pde - a_ode) / scale}});
    }
    // restart the ODE from the first clean PDE state with the final count
    std::size_t i0 = 0;
    while (i0 < tk.size() && (tk[i0].merging() || tk[i0].size() != ode_end.size())) ++i0;
    const ChainSpec restart = tk[i0].chain();
    const double horizon = s_max - tk[i0].s;
    const Trajectory rt = horizon > 0.0 ? integrate(m, restart, horizon, opt) : Trajectory{};
    for (std::size_t i = i0; horizon > 0.0 && i < tk.size(); ++i) {
      if (tk[i].merging() || tk[i].size() != restart.size()) continue;
      const ChainSpec q = rt.state_at(std::min(rt.s_final, tk[i].s - tk[i0].s));
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double start = origin[k] >= 0 ? chain.positions[std::size_t(origin[k])] : ode_end.positions[k];
        const double scale = std::max(std::abs(ode_end.positions[k] - start), finest->run.h);
        restart_dev = std::max(restart_dev, std::abs(tk[i].points[k].a - q.positions[k]) / scale);
      }
    }
  }
  set_status(r, 9, counts_ok && labels_ok && worst <= kCollisionTolerance && restart_dev <= kCollisionTolerance,
             {{"eps", finest->run.eps}, {"initial_count", tk.front().size()}, {"final_count", tk.back().size()},
              {"counts_ok", counts_ok}, {"labels_ok", labels_ok}, {"survivors", surv},
              {"survivor_rel_err", worst}, {"restart_rel_dev", restart_dev}, {"tolerance", kCollisionTolerance}});
}

void experiment_splitting(const RunConfig& cfg, ExperimentResult& r, const fs::path& root) {
  const Potential p = cfg.potential.make();
  const double P = model_prefactor(cfg, p, r.details);
  const FrontModel m(p, P);
  const MultiplicitySpec& ms = *cfg.multiplicity;
  const double s_max = cfg.s_max > 0.0 ? cfg.s_max : 1e-3;
  const double w = p.omega();
  OdeOptions opt;
  opt.tol = cfg.ode_tol;
  make_dir(root);

  // ODE splitting solutions at shrinking offsets
  std::vector<ChainSpec> finals;
  json odes = json::array();
  EnvelopeReport env;
  for (std::size_t i = 0; i < ms.offsets.size(); ++i) {
    const ChainSpec c = split_initial(ms.points, ms.multiplicities, ms.left_label, ms.offsets[i], p.well_count());
    const Trajectory t = with_context("splitting offset=" + eps_label(ms.offsets[i]),
                                      [&] { return integrate(m, c, s_max, opt); });
    finals.push_back(t.state_at(s_max));
    write_trajectory_csv(t, uniform_times(s_max, cfg.samples),
                         (root / ("ode_offset_" + eps_label(ms.offsets[i]) + ".csv")).string());
    if (i + 1 == ms.offsets.size()) env = envelope_check(t);
    odes.push_back({{"offset", ms.offsets[i]}, {"positions", finals.back().positions}});
  }
  bool cauchy = true;
  json diffs = json::array();
  double prev = kInf;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    double d = 0.0;
    if (finals[i].size() != finals[i + 1].size()) cauchy = false;
    else
      for (std::size_t k = 0; k < finals[i].size(); ++k)
        d = std::max(d, std::abs(finals[i].positions[k] - finals[i + 1].positions[k]));
    diffs.push_back(d);
    cauchy = cauchy && d < prev;
    prev = d;
  }

  // PDE from a smoothed multiplicity datum
  const double eps = *std::min_element(cfg.eps.begin(), cfg.eps.end());
  const double margin = cfg.margin > 0.0 ? cfg.margin : 6.0;
  Field f;
  f.eps = eps;
  f.grid = Grid1D::with_spacing(ms.points.front() - margin, ms.points.back() + margin, eps / cfg.cells_per_eps);
  std::size_t total = 0;
  for (int mult : ms.multiplicities) total += std::size_t(std::abs(mult));
  for (std::size_t j = 0; j < f.grid.n; ++j) {
    const double x = f.grid.x(j);
    int label = ms.left_label;
    double v = p.well(std::size_t(label)).sigma;
    for (std::size_t i = 0; i < ms.points.size(); ++i) {
      const int next = label + ms.multiplicities[i];
      v += (p.well(std::size_t(next)).sigma - p.well(std::size_t(label)).sigma) * 0.5 *
           (1.0 + std::tanh((x - ms.points[i]) / eps));
      label = next;
    }
    f.values.push_back(v);
  }
  std::vector<double> times{0.0};
  for (std::size_t i = 0; i < cfg.samples; ++i)
    times.push_back(std::min(s_max, s_max * std::pow(10.0, -3.0 * double(cfg.samples - 1 - i) / double(cfg.samples - 1))));
  const PdeRun pr = with_context("splitting eps=" + eps_label(eps),
                                 [&] { return simulate(p, f, s_max, times, root / eps_label(eps)); });
  std::vector<double> xs, ys;
  for (const auto& t : pr.tracked) {
    if (t.merging() || t.size() != total || total < 2) continue;
    bool repulsive = true;
    for (std::size_t k = 0; k + 1 < t.points.size(); ++k)
      repulsive = repulsive && t.points[k].orientation == t.points[k + 1].orientation;
    if (!repulsive || t.d_min_plus < 20.0 * eps) continue;
    xs.push_back(t.s);
    ys.push_back(std::pow(t.d_min_plus, w + 2.0));
  }
  AffineFit pde_fit;
  if (xs.size() >= 3) pde_fit = fit_affine(xs, ys);
  const bool pde_ok = xs.size() >= 10 && pde_fit.r2 >= 0.999 && pr.tracked.back().size() == total;
  const bool ode_ok = env.has_repulsive && env.plus.r2 >= 0.999;
  r.details["ode"] = odes;
  r.details["pde"] = run_json(pr);
  set_status(r, 10, cauchy && pde_ok && ode_ok,
             {{"cauchy_differences", diffs}, {"cauchy_decreasing", cauchy}, {"ode_r2", env.plus.r2},
              {"ode_slope", env.plus.slope}, {"pde_eps", eps}, {"pde_r2", pde_fit.r2}, {"pde_slope", pde_fit.slope},
              {"pde_samples", xs.size()}, {"pde_final_count", pr.tracked.back().size()}, {"expected_count", total}});
}

}  // namespace

PrefactorEstimate estimate_prefactor(const Potential& p, double eps, double r, double relax, double cells) {
  static std::mutex mu;
  static std::map<std::string, PrefactorEstimate> memo;
  char key[512];
  std::snprintf(key, sizeof key, "%s|%d|%.17g|%.17g|%.17g|%.17g|%.17g", p.family_name().c_str(), p.theta(), p.scale(),
                eps, r, relax, cells);
  std::string k = key;
  for (const auto& wl : p.wells()) k += "|" + std::to_string(wl.sigma);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(k); it != memo.end()) return it->second;
  }
  const ChainSpec c{{-r, r}, {0, 1, 0}};
  const double m = std::max(1.0, 10.0 * r) + 0.5;
  const GluedField g = glue_chain(p, c, eps, Grid1D::with_spacing(-r - m, r + m, eps / cells));
  const double w = p.omega();
  const double s_rel = std::pow(eps, w) * relax;
  const Field f1 = run(p, g.field, s_rel, {s_rel}).snapshots.back();
  const TrackedFronts t1 = front_points(p, f1);
  if (t1.size() != 2) throw std::runtime_error("estimate_prefactor: pair not resolved after relaxation");
  const FrontSystem sys = FrontModel(p, 1.0).system({0, 1, 0});
  const double unit = sys.couplings[0], S = sys.masses[0];
  const double g1 = t1.points[1].a - t1.points[0].a;
  // advance until the gap closes by about 1%
  const double ds = 0.01 * g1 / (default_prefactor(w) * unit / S * std::pow(g1, -(w + 1.0)));
  const Field f2 = run(p, f1, ds, {ds}).snapshots.back();
  const TrackedFronts t2 = front_points(p, f2);
  if (t2.size() != 2) throw std::runtime_error("estimate_prefactor: pair collided during the measurement");
  const double g2 = t2.points[1].a - t2.points[0].a;
  PrefactorEstimate e;
  e.gap = 0.5 * (g1 + g2);
  e.velocity = (g1 - g2) / (2.0 * ds);
  e.measured = S * e.velocity * std::pow(e.gap, w + 1.0) / unit;
  const double lo = std::pow(2.0, w), hi = std::pow(2.0, w + 1.0);
  e.resolved = std::abs(std::log(e.measured / lo)) <= std::abs(std::log(e.measured / hi)) ? lo : hi;
  std::lock_guard<std::mutex> lock(mu);
  memo[k] = e;
  return e;
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  ExperimentResult r;
  r.experiment = cfg.experiment;
  r.output_dir = cfg.output_dir;
  for (int id = 1; id <= 10; ++id) r.criteria.push_back({id, kCriterionNames[id - 1], "skipped", {}});
  const fs::path root = fs::path(cfg.output_dir) / cfg.experiment;
  const std::string& e = cfg.experiment;
  if (e == "constants") experiment_constants(cfg, r, root);
  else if (e == "ode_only") experiment_ode_only(cfg, r, root);
  else if (e == "pde_vs_ode") experiment_pde_vs_ode(cfg, r, root, true);
  else if (e == "speed_scaling") experiment_pde_vs_ode(cfg, r, root, false);
  else if (e == "annihilation") experiment_annihilation(cfg, r, root);
  else if (e == "splitting") experiment_splitting(cfg, r, root);
  else if (e == "discrepancy_plateau") experiment_plateau(cfg, r, root);
  else if (e == "quantization") experiment_quantization(cfg, r, root);
  else throw ConfigError("unknown experiment '" + e + "'");
  json s = r.summary();
  s["config"] = to_json(cfg);
  write_json(s, make_dir(cfg.output_dir) / "summary.json");
  return r;
}

}  // namespace frontflow
