#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

#include "frontflow/front_ode.hpp"
#include "frontflow/front_tracking.hpp"
#include "frontflow/pgl_sim.hpp"

using namespace frontflow;

namespace {

const Potential& dw() {
  static const Potential p = make_double_well(2);
  return p;
}
const Potential& tw() {
  static const Potential p = make_triple_well(2);
  return p;
}

// frozen from the first run
constexpr double kWpoRatio = 0.0568264988773853;

}  // namespace

TEST(FrontSet, ConstantFieldIsEmpty) {
  Field f;
  f.grid = Grid1D(-1.0, 1.0, 101);
  f.values.assign(101, 1.0);
  EXPECT_TRUE(front_set(dw(), f).empty());
  const TrackedFronts t = front_points(dw(), f);
  EXPECT_EQ(t.size(), 0u);
  EXPECT_EQ(t.labels, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(t.d_min, 2.0);
}

TEST(FrontSet, SingleFrontIsNarrow) {
  const double eps = 0.01;
  const GluedField g = glue_chain(dw(), ChainSpec{{0.0}, {0, 1}}, eps, Grid1D::with_spacing(-1, 1, eps / 16));
  const auto iv = front_set(dw(), g.field);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_LT(iv[0].lo, 0.0);
  EXPECT_GT(iv[0].hi, 0.0);
  EXPECT_LE(iv[0].hi - iv[0].lo, 20 * eps);
  const TrackedFronts t = front_points(dw(), g.field);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.d_min, 2.0);
  EXPECT_DOUBLE_EQ(t.d_min_plus, 2.0);
}

TEST(FrontSet, TwoFrontsTwoIntervals) {
  const double eps = 0.01;
  const GluedField g = glue_chain(dw(), ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps,
                                  Grid1D::with_spacing(-5.5, 5.5, eps / 8));
  EXPECT_EQ(front_set(dw(), g.field).size(), 2u);
}

TEST(FrontPoints, RecoversGluedChain) {
  const double eps = 0.01;
  const ChainSpec c{{-1.2, -0.6, 0.1, 0.5, 1.3}, {1, 2, 1, 0, 1, 0}};
  const GluedField g = glue_chain(tw(), c, eps, Grid1D::with_spacing(-8.0, 8.0, eps / 8));
  const TrackedFronts t = front_points(tw(), g.field);
  ASSERT_EQ(t.size(), c.size());
  EXPECT_FALSE(t.merging());
  EXPECT_TRUE(t.consistent);
  EXPECT_EQ(t.labels, c.labels);
  for (std::size_t k = 0; k < c.size(); ++k) {
    EXPECT_NEAR(t.points[k].a, c.positions[k], g.field.h()) << k;
    EXPECT_EQ(t.points[k].transition, c.transition(k));
    EXPECT_EQ(t.points[k].orientation, c.orientation(k));
  }
  const FrontModel m(tw());
  const FrontSystem sys = m.system(c.labels);
  EXPECT_NEAR(t.d_min_plus, min_repulsive_gap(sys, c.positions), g.field.h());
  EXPECT_NEAR(t.d_min_minus, min_attractive_gap(sys, c.positions), g.field.h());
  EXPECT_NEAR(t.d_min, 0.4, g.field.h());
  EXPECT_EQ(t.chain().labels, c.labels);
}

TEST(FrontPoints, CollisionRemovesTwoFronts) {
  const double eps = 0.04;
  const ChainSpec c{{-1.0, 0.0, 1.5}, {0, 1, 0, 1}};
  const GluedField g = glue_chain(dw(), c, eps, Grid1D::with_spacing(-9.0, 9.0, eps / 16));
  std::vector<double> ts;
  for (int i = 0; i <= 30; ++i) ts.push_back(0.01 * i);
  std::vector<TrackedFronts> series;
  RunOptions o;
  o.keep_snapshots = false;
  run(dw(), g.field, 0.3, ts, o, [&](const Field& f) { series.push_back(front_points(dw(), f)); });
  EXPECT_EQ(series.front().size(), 3u);
  EXPECT_EQ(series.back().size(), 1u);
  EXPECT_EQ(series.back().labels, (std::vector<int>{0, 1}));
  for (std::size_t i = 1; i < series.size(); ++i) EXPECT_LE(series[i].size(), series[i - 1].size());

  const std::string path = ::testing::TempDir() + "tracked.csv";
  write_tracked_csv(series, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "s,l,merging,d_min,d_min_plus,d_min_minus,a_1,i_1,dag_1,a_2,i_2,dag_2,a_3,i_3,dag_3");
}

TEST(FrontPoints, CloseAnnihilatingPairIsAmbiguous) {
  // front and anti-front 2 eps apart share one front-set interval
  Field f;
  f.eps = 0.01;
  f.grid = Grid1D::with_spacing(-1.0, 1.0, f.eps / 16);
  for (std::size_t j = 0; j < f.grid.n; ++j) {
    const double x = f.grid.x(j);
    f.values.push_back(-1.0 + 1.5 * std::exp(-x * x / (2e-4)));
  }
  const TrackedFronts t = front_points(dw(), f);
  EXPECT_TRUE(t.merging());
  EXPECT_EQ(t.size(), 0u);
  EXPECT_TRUE(t.consistent);
}

TEST(Wpi, GluedDataWithinTailBound) {
  const double eps = 0.01, delta = 0.25;
  const ProfileSet ps(dw());
  const GluedField g = glue_chain(ps, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps,
                                  Grid1D::with_spacing(-5.5, 5.5, eps / 16));
  const TrackedFronts t = front_points(dw(), g.field);
  const auto d = wpi_distance(ps, g.field, t, delta);
  ASSERT_EQ(d.size(), 2u);
  // tail of the other front across the window plus the centered-difference error
  const FrontProfile z = ps.profile(0, Orientation::plus);
  const double y = (1.0 - delta) / eps;
  const double tail = (1.0 - z.zeta(y)) + z.dzeta(y);
  double d3 = 0.0;
  for (double x = -5; x <= 5; x += 0.01) {
    const double k = 1e-3;
    d3 = std::max(d3, std::abs((z.dzeta(x + k) - 2 * z.dzeta(x) + z.dzeta(x - k)) / (k * k)));
  }
  const double r = g.field.h() / eps;
  const double bound = 1.05 * tail + r * r * d3 / 6.0;
  for (double x : d) EXPECT_LE(x, bound);
  EXPECT_THROW(wpi_distance(ps, g.field, t, 0.6), std::invalid_argument);
}

TEST(Wpi, RelaxationImprovesPreparedness) {
  const double eps = 0.01, delta = 0.2;
  const ProfileSet ps(dw());
  const GluedField g = glue_chain(ps, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps,
                                  Grid1D::with_spacing(-5.5, 5.5, eps / 16));
  const auto before = wpi_distance(ps, g.field, front_points(dw(), g.field), delta);
  const RunResult r = run(dw(), g.field, 0.01, {0.01});
  const auto after = wpi_distance(ps, r.snapshots[0], front_points(dw(), r.snapshots[0]), delta);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT(after[k], before[k]);
}

TEST(Wpi, TranslationInvariant) {
  const double eps = 0.01, h = eps / 16;
  const ProfileSet ps(dw());
  const std::size_t n = 3201;  // 0.3 is 480 cells
  const GluedField a = glue_chain(ps, ChainSpec{{0.0}, {0, 1}}, eps, Grid1D(-1.0, 1.0, n));
  const GluedField b = glue_chain(ps, ChainSpec{{0.3}, {0, 1}}, eps, Grid1D(-0.7, 1.3, n));
  ASSERT_NEAR(a.field.h(), h, 1e-15);
  const double da = wpi_distance(ps, a.field, front_points(dw(), a.field), 0.1037)[0];
  const double db = wpi_distance(ps, b.field, front_points(dw(), b.field), 0.1037)[0];
  EXPECT_NEAR(da, db, 1e-10);
}

TEST(Wpo, ConstantMonotoneAndRegression) {
  Field f;
  f.eps = 0.01;
  f.grid = Grid1D(-1.0, 1.0, 401);
  f.values.assign(401, -1.0);
  EXPECT_EQ(wpo_energy(dw(), f, front_points(dw(), f), 0.1).energy, 0.0);

  const double eps = 0.01;
  const GluedField g = glue_chain(dw(), ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps,
                                  Grid1D::with_spacing(-5.5, 5.5, eps / 16));
  const TrackedFronts t = front_points(dw(), g.field);
  double prev = INFINITY;
  for (double d : {0.02, 0.05, 0.1, 0.2, 0.4}) {
    const WpoReport w = wpo_energy(dw(), g.field, t, d);
    EXPECT_LE(w.energy, prev);
    prev = w.energy;
  }
  const WpoReport w = wpo_energy(dw(), g.field, t, 10 * eps);
  EXPECT_NEAR(w.scale, 1e-3, 1e-15);
  EXPECT_NEAR(w.ratio, kWpoRatio, 1e-3 * kWpoRatio);
}
