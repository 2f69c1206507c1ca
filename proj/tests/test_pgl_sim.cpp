#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

#include "frontflow/pgl_sim.hpp"
#include "frontflow/stationary_fronts.hpp"

using namespace frontflow;

namespace {

Field constant_field(const Grid1D& g, double value, double eps) {
  Field f;
  f.grid = g;
  f.values.assign(g.n, value);
  f.eps = eps;
  return f;
}

// Upward crossing of the level z, linearly interpolated; NaN if none.
double crossing(const Field& f, double z, bool upward) {
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    const double a = f.values[j] - z, b = f.values[j + 1] - z;
    if (upward ? (a < 0 && b >= 0) : (a >= 0 && b < 0)) return f.grid.x(j) + f.h() * a / (a - b);
  }
  return NAN;
}

GluedField single_front(double eps, double lo, double hi) {
  static const Potential p = make_double_well(2);
  return glue_chain(p, ChainSpec{{0.0}, {0, 1}}, eps, Grid1D::with_spacing(lo, hi, eps / 16));
}

}  // namespace

TEST(Step, WellIsEquilibrium) {
  const Potential p = make_triple_well(2);
  for (double sigma : {-1.0, 0.0, 1.0}) {
    const Field f = constant_field(Grid1D(-1.0, 1.0, 201), sigma, 0.02);
    const Field g = step(p, f, 1e-4);
    for (double v : g.values) EXPECT_NEAR(v, sigma, 1e-14);
  }
}

TEST(Step, SeparatorStaysSpatiallyConstant) {
  for (const Potential& p : {make_double_well(2), make_triple_well(2)}) {
    const double z = p.separator(0);
    const Field f = constant_field(Grid1D(-1.0, 1.0, 201), z, 0.02);
    const Field g = step(p, f, 1e-4);
    for (double v : g.values) {
      EXPECT_EQ(v, g.values[0]);
      EXPECT_NEAR(v, z, 1e-12);
    }
  }
}

TEST(Step, StampsAndRejectsBadInput) {
  const Potential p = make_double_well(2);
  const Field f = constant_field(Grid1D(-1.0, 1.0, 201), 1.0, 0.1);
  StepInfo info;
  const Field g = step(p, f, 0.5, {}, &info);
  EXPECT_EQ(info.dt, 0.5);
  EXPECT_EQ(g.t_phys, 0.5);
  EXPECT_NEAR(g.s, 0.5 * 1e-3, 1e-18);
  EXPECT_THROW(step(p, f, 0.0), std::invalid_argument);
  Field bad = f;
  bad.values.pop_back();
  EXPECT_THROW(step(p, bad, 0.1), std::invalid_argument);
}

TEST(Energy, ConstantAndLocalized) {
  const Potential p = make_double_well(2);
  const Field f = constant_field(Grid1D(-1.0, 1.0, 201), -1.0, 0.01);
  EXPECT_EQ(energy(p, f), 0.0);
  for (double x : discrepancy_field(p, f)) EXPECT_EQ(x, 0.0);

  const GluedField g = single_front(0.01, -1.0, 1.0);
  const std::vector<double> one(g.field.size(), 1.0);
  EXPECT_EQ(localized_energy(p, g.field, one), energy(p, g.field));
  EXPECT_THROW(localized_energy(p, g.field, {1.0}), std::invalid_argument);
}

TEST(Energy, GluedFrontCarriesFrontEnergy) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.01, -1.0, 1.0);
  const double S = 16.0 * std::sqrt(2.0) / 15.0;
  EXPECT_NEAR(energy(p, g.field) / S, 1.0, 0.02);
  EXPECT_NEAR(energy(p, g.field, g.dvdx) / S, 1.0, 0.02);
  EXPECT_NEAR(discrete_energy(p, g.field) / S, 1.0, 0.02);
}

TEST(Energy, DiscrepancyVanishesOnStationaryFront) {
  const Potential p = make_double_well(2);
  const double eps = 0.01;
  const GluedField g = single_front(eps, -1.0, 1.0);
  double worst = 0.0;
  for (double x : discrepancy_field(p, g.field, g.dvdx)) worst = std::max(worst, std::abs(x));
  EXPECT_LE(worst, 1e-6 / eps);
}

TEST(Energy, DiscrepancyBoundedByDensity) {
  const Potential p = make_triple_well(2);
  const GluedField g = glue_chain(p, ChainSpec{{-0.5, 0.0, 0.5}, {0, 1, 2, 1}}, 0.02,
                                  Grid1D::with_spacing(-3.5, 3.5, 0.02 / 16));
  const auto e = energy_density(p, g.field);
  const auto xi = discrepancy_field(p, g.field);
  for (std::size_t j = 0; j < e.size(); ++j) EXPECT_LE(std::abs(xi[j]), e[j]);
  const auto r = renormalized_discrepancy(p, g.field);
  EXPECT_NEAR(r[100], xi[100] * std::pow(0.02, -3.0), 1e-9 * std::abs(r[100]));
}

TEST(Run, EmptyOutputTimesGiveDiagnosticsOnly) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.04, -2.0, 2.0);
  const RunResult r = run(p, g.field, 0.01, {});
  EXPECT_TRUE(r.snapshots.empty());
  EXPECT_GT(r.diagnostics.size(), 1u);
  EXPECT_NEAR(r.diagnostics.back().s, 0.01, 1e-15);
  EXPECT_THROW(run(p, g.field, 0.01, {0.02}), std::invalid_argument);
  EXPECT_THROW(run(p, g.field, 0.01, {0.005, 0.004}), std::invalid_argument);
}

TEST(Run, ZeroHorizonHasZeroResidual) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.04, -2.0, 2.0);
  const RunResult r = run(p, g.field, 0.0, {0.0});
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(energy_identity_residual(r), 0.0);
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.snapshots[0].values, g.field.values);
}

TEST(Run, SnapshotStampsMatchPhysicalTime) {
  const Potential p = make_double_well(2);
  const double eps = 0.04;
  const GluedField g = single_front(eps, -2.0, 2.0);
  std::vector<double> ts = {0.0, 0.001, 0.0025, 0.004, 0.01};
  int calls = 0;
  const RunResult r = run(p, g.field, 0.01, ts, {}, [&](const Field&) { ++calls; });
  ASSERT_EQ(r.snapshots.size(), ts.size());
  EXPECT_EQ(calls, 5);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(r.snapshots[i].s, ts[i]);
    EXPECT_NEAR(r.snapshots[i].s, std::pow(eps, 3.0) * r.snapshots[i].t_phys, 1e-12 * ts[i]);
  }
}

TEST(Run, SingleFrontBarelyMoves) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.02, -2.0, 2.0);
  const RunResult r = run(p, g.field, 0.1, {0.1});
  const double a = crossing(r.snapshots.back(), 0.0, true);
  EXPECT_LE(std::abs(a), 10 * g.field.h());
  EXPECT_LE(r.max_energy_increase, 1e-12);
}

TEST(Run, EnergyIdentityResidual) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.02, -2.0, 2.0);
  const RunResult r = run(p, g.field, 0.05, {});
  EXPECT_LE(energy_identity_residual(r), 1e-3);

  RunOptions coarse, fine;
  coarse.dt_max = 0.2;
  fine.dt_max = 0.1;
  const double rc = energy_identity_residual(run(p, g.field, 0.001, {}, coarse));
  const double rf = energy_identity_residual(run(p, g.field, 0.001, {}, fine));
  EXPECT_LT(rf, rc);
}

TEST(Run, AttractivePairInvariants) {
  const Potential p = make_double_well(2);
  const double eps = 0.04;
  const GluedField g = glue_chain(p, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps,
                                  Grid1D::with_spacing(-5.5, 5.5, eps / 16));
  // hull of the initial range and the wells
  const double lo = std::min(-1.0, *std::min_element(g.field.values.begin(), g.field.values.end()));
  const double hi = std::max(1.0, *std::max_element(g.field.values.begin(), g.field.values.end()));
  std::vector<double> ts;
  for (int i = 1; i <= 40; ++i) ts.push_back(0.005 * i);
  double asym = 0.0, range = 0.0, bound = 0.0;
  const RunResult r = run(p, g.field, 0.2, ts, {}, [&](const Field& f) {
    const std::size_t n = f.size();
    for (std::size_t j = 0; j < n; ++j) {
      asym = std::max(asym, std::abs(f.values[j] - f.values[n - 1 - j]));
      range = std::max(range, std::max(lo - 1e-6 - f.values[j], f.values[j] - hi - 1e-6));
    }
    const auto e = energy_density(p, f);
    const auto xi = discrepancy_field(p, f);
    for (std::size_t j = 0; j < n; ++j) bound = std::max(bound, std::abs(xi[j]) - e[j]);
  });
  EXPECT_LE(r.max_energy_increase, 1e-12);
  EXPECT_LE(asym, 1e-10);
  EXPECT_LE(range, 0.0);
  EXPECT_LE(bound, 0.0);
  // the pair annihilates before s = 0.2
  EXPECT_LT(*std::max_element(r.snapshots.back().values.begin(), r.snapshots.back().values.end()), 0.0);
  for (std::size_t i = 1; i < r.diagnostics.size(); ++i)
    EXPECT_LE(r.diagnostics[i].energy, r.diagnostics[i - 1].energy + 1e-12);
}

TEST(Output, SnapshotAndDiagnosticsCsv) {
  const Potential p = make_double_well(2);
  const GluedField g = single_front(0.04, -2.0, 2.0);
  const RunResult r = run(p, g.field, 0.001, {0.001});
  const std::string a = ::testing::TempDir() + "snap.csv", b = ::testing::TempDir() + "diag.csv";
  write_snapshot_csv(r.snapshots[0], a);
  write_diagnostics_csv(r, b);
  std::ifstream ia(a), ib(b);
  std::string line;
  std::getline(ia, line);
  EXPECT_EQ(line, "x,v");
  std::size_t rows = 0;
  while (std::getline(ia, line)) ++rows;
  EXPECT_EQ(rows, g.field.size());
  std::getline(ib, line);
  EXPECT_EQ(line, "s,t,dt,E,dissip,residual");
}
