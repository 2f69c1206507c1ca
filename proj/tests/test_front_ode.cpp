#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "frontflow/front_ode.hpp"
#include "frontflow/stationary_fronts.hpp"

using namespace frontflow;

namespace {

const Potential& double_well() {
  static const Potential p = make_double_well(2);
  return p;
}
const Potential& triple_well() {
  static const Potential p = make_triple_well(2);
  return p;
}
const FrontModel& double_model() {
  static const FrontModel m(double_well());
  return m;
}
const FrontModel& triple_model() {
  static const FrontModel m(triple_well());
  return m;
}

}  // namespace

TEST(Couplings, DoubleWellPair) {
  const auto c = interaction_constants(2);
  const auto b = build_couplings(double_well(), c, {0, 1, 0}, 8.0);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(b[0], 0.5 * c.A, 1e-15);
  EXPECT_NEAR(b[0], 0.369282656502410, 1e-12);
}

TEST(Couplings, TripleWellRepulsivePair) {
  const auto c = interaction_constants(2);
  const auto b = build_couplings(triple_well(), c, {0, 1, 2}, 8.0);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(b[0], -8.0 * c.B, 1e-13);
  EXPECT_NEAR(b[0], -23.634090016154232, 1e-10);
}

TEST(Couplings, SignIsMinusProductOfOrientations) {
  const auto c = interaction_constants(2);
  // (+,+), (+,-), (-,+), (-,-)
  const std::vector<std::vector<int>> paths = {{0, 1, 2}, {0, 1, 0}, {1, 0, 1}, {2, 1, 0}};
  for (const auto& labels : paths) {
    ChainSpec ch{{0.0, 1.0}, labels};
    const double eps_sign = -sign_of(ch.orientation(0)) * sign_of(ch.orientation(1));
    const double b = build_couplings(triple_well(), c, labels, 8.0)[0];
    EXPECT_EQ(b > 0 ? 1.0 : -1.0, eps_sign);
  }
}

TEST(FrontModel, MassesAndPrefactor) {
  EXPECT_DOUBLE_EQ(double_model().prefactor(), 8.0);
  EXPECT_NEAR(double_model().mass(0), 16.0 * std::sqrt(2.0) / 15.0, 1e-10);
  const FrontModel m(double_well(), 16.0);
  EXPECT_DOUBLE_EQ(m.prefactor(), 16.0);
  const FrontSystem s = triple_model().system({0, 1, 2, 1});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.couplings.size(), 2u);
  EXPECT_LT(s.couplings[0], 0.0);
  EXPECT_GT(s.couplings[1], 0.0);
  EXPECT_THROW(triple_model().system({0, 2}), std::invalid_argument);
}

TEST(Rhs, SymmetriesAndTelescoping) {
  const FrontSystem pair = double_model().system({0, 1, 0});
  const auto v = rhs(pair, {-0.5, 0.5});
  EXPECT_GT(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[0], -v[1]);

  FrontSystem three = triple_model().system({0, 1, 2, 1});
  three.couplings = {1.3, 1.3};
  three.masses = {0.7, 0.7, 0.7};
  EXPECT_NEAR(rhs(three, {-1.0, 0.0, 1.0})[1], 0.0, 1e-15);

  const FrontSystem mixed = triple_model().system({0, 1, 0, 1, 2, 1, 0});
  const std::vector<double> a = {-2.0, -1.1, 0.0, 0.4, 1.3, 2.9};
  const auto u = rhs(mixed, a);
  double p = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    p += mixed.masses[k] * u[k];
    scale += std::abs(mixed.masses[k] * u[k]);
  }
  EXPECT_LE(std::abs(p), 1e-14 * scale);
  EXPECT_THROW(rhs(mixed, {0.0, 0.0, 1.0, 2.0, 3.0, 4.0}), std::domain_error);
}

TEST(Lyapunov, GradientConsistency) {
  const FrontSystem sys = triple_model().system({0, 1, 0, 1, 2, 1, 0});
  const std::vector<double> a = {-2.0, -1.1, 0.0, 0.4, 1.3, 2.9};
  const auto v = rhs(sys, a);
  const auto g = grad_F(sys, a);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(v[k], -g[k] / sys.masses[k], 1e-12 * std::max(1.0, std::abs(v[k])));
    const double h = 1e-6;
    auto ap = a, am = a;
    ap[k] += h;
    am[k] -= h;
    const double fd = (lyapunov_F(sys, ap) - lyapunov_F(sys, am)) / (2 * h);
    EXPECT_NEAR(fd, g[k], 1e-6 * std::max(1.0, std::abs(g[k])));
  }
}

TEST(Integrate, SingleFrontIsStatic) {
  const Trajectory t = integrate(double_model(), ChainSpec{{0.3}, {0, 1}}, 2.0);
  EXPECT_TRUE(t.events.empty());
  EXPECT_EQ(t.state_at(1.5).positions[0], 0.3);
  EXPECT_EQ(t.s_final, 2.0);
}

TEST(Integrate, AttractivePairMatchesClosedForm) {
  const FrontSystem sys = double_model().system({0, 1, 0});
  const double S = sys.masses[0], B = sys.couplings[0], w = sys.omega;
  const double smax = S / (2.0 * (w + 2.0) * B);
  EXPECT_NEAR(smax, two_body_collision_time(1.0, B, S, S, w), 1e-15);
  EXPECT_NEAR(smax, 0.408493179945, 1e-11);

  OdeOptions opt;
  opt.tol = 1e-8;
  const Trajectory t = integrate(double_model(), ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, 1.0, opt);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_NEAR(t.events[0].s / smax, 1.0, 1e-6);
  EXPECT_NEAR(t.events[0].location, 0.0, 1e-12);
  EXPECT_EQ(t.events[0].survivor, -1);
  EXPECT_EQ(t.events[0].labels_after, std::vector<int>{0});
  // g^(omega+2) is affine in s; compare there, where the error does not blow up at the collision
  double worst = 0.0;
  for (const auto& q : t.segments[0].samples) {
    const double g = q.positions[1] - q.positions[0];
    worst = std::max(worst, std::abs(std::pow(g, w + 2) - std::pow(two_body_gap(1.0, B, S, S, w, q.s), w + 2)));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_EQ(t.front_count_at(0.9), 0u);
}

TEST(Integrate, RepulsivePairMatchesClosedForm) {
  const FrontSystem sys = triple_model().system({0, 1, 2});
  const double S = sys.masses[0], B = sys.couplings[0], w = sys.omega;
  OdeOptions opt;
  opt.tol = 1e-8;
  const Trajectory t = integrate(triple_model(), ChainSpec{{-0.1, 0.1}, {0, 1, 2}}, 0.5, opt);
  EXPECT_TRUE(t.events.empty());
  double worst = 0.0;
  for (const auto& q : t.segments[0].samples) {
    const double g = q.positions[1] - q.positions[0];
    const double exact = std::pow(std::pow(0.2, w + 2) + (w + 2) * (2.0 / S) * std::abs(B) * q.s, 1.0 / (w + 2));
    EXPECT_NEAR(exact, two_body_gap(0.2, B, S, S, w, q.s), 1e-14);
    worst = std::max(worst, std::abs(g / exact - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Integrate, MomentumLyapunovAndOrdering) {
  const ChainSpec c{{-2.0, -1.1, 0.0, 0.4, 1.3, 2.9}, {0, 1, 0, 1, 2, 1, 0}};
  const Trajectory t = integrate(triple_model(), c, 1.0);
  ASSERT_FALSE(t.events.empty());
  const auto& seg = t.segments.front();
  double p0 = 0.0, span = c.positions.back() - c.positions.front(), msum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    p0 += seg.system.masses[k] * c.positions[k];
    msum += seg.system.masses[k];
  }
  double prevF = seg.samples.front().F;
  for (const auto& q : seg.samples) {
    double p = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) p += seg.system.masses[k] * q.positions[k];
    EXPECT_LE(std::abs(p - p0), 1e-9 * msum * span);
    EXPECT_LE(q.F, prevF + 1e-12 * std::abs(prevF));
    prevF = q.F;
    for (std::size_t k = 0; k + 1 < q.positions.size(); ++k) EXPECT_LT(q.positions[k], q.positions[k + 1]);
  }
}

TEST(Integrate, CollisionBookkeeping) {
  const ChainSpec c{{-2.0, -1.1, 0.0, 0.4, 1.3, 2.9}, {0, 1, 0, 1, 2, 1, 0}};
  const Trajectory t = integrate(triple_model(), c, 50.0);
  std::size_t prev = c.size();
  for (std::size_t i = 1; i < t.segments.size(); ++i) {
    const auto& seg = t.segments[i];
    EXPECT_EQ((prev - seg.system.size()) % 2, 0u);
    EXPECT_GT(prev, seg.system.size());
    prev = seg.system.size();
    ChainSpec check;
    check.labels = seg.system.labels;
    check.positions.resize(seg.system.size());
    for (std::size_t k = 0; k < check.positions.size(); ++k) check.positions[k] = double(k);
    EXPECT_NO_THROW(validate_chain(check, 3));
  }
  for (const auto& e : t.events) {
    EXPECT_EQ(e.labels_before.front(), e.labels_after.front());
    EXPECT_EQ(e.labels_before.back(), e.labels_after.back());
  }
}

TEST(Integrate, NearCollisionExponent) {
  // outer repulsive neighbors perturb the attractive middle pair
  const ChainSpec c{{-2.0, -0.3, 0.3, 2.5}, {0, 1, 2, 1, 0}};
  const Trajectory t = integrate(triple_model(), c, 10.0);
  ASSERT_FALSE(t.events.empty());
  const double sc = t.events.front().s;
  const auto& seg = t.segments.front();
  std::vector<double> lx, ly;
  double tmin = INFINITY;
  for (const auto& q : seg.samples) tmin = std::min(tmin, sc - q.s);
  for (const auto& q : seg.samples) {
    const double r = sc - q.s;
    if (r > 0 && r <= 10 * tmin) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(min_attractive_gap(seg.system, q.positions)));
    }
  }
  ASSERT_GE(lx.size(), 10u);
  const AffineFit f = fit_affine(lx, ly);
  EXPECT_NEAR(f.slope, 0.2, 0.2 * 0.02);
}

TEST(Integrate, ClusterOfThreeLeavesOneFront) {
  const Trajectory t = integrate(double_model(), ChainSpec{{-0.5, 0.0, 0.5}, {0, 1, 0, 1}}, 2.0);
  ASSERT_FALSE(t.events.empty());
  const auto& last = t.segments.back();
  EXPECT_EQ(last.system.size(), 1u);
  EXPECT_EQ(last.system.labels, (std::vector<int>{0, 1}));
  EXPECT_NEAR(last.samples.front().positions[0], 0.0, 1e-9);
}

TEST(Integrate, AnnihilationLeavesDistantFront) {
  const ChainSpec c{{-0.5, 0.0, 0.8}, {0, 1, 0, 1}};
  const Trajectory t = integrate(double_model(), c, 5.0);
  ASSERT_GE(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].removed, (std::vector<std::size_t>{0, 1}));
  const auto& after = t.segments[1];
  EXPECT_EQ(after.system.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(after.system.size(), 1u);
  EXPECT_LT(after.samples.front().positions[0], 0.8);
  EXPECT_GT(after.samples.front().positions[0], 0.0);
}

TEST(SplitInitial, Layouts) {
  const ChainSpec same = split_initial({-1.0, 0.5}, {1, -1}, 0, 0.1, 2);
  EXPECT_EQ(same.positions, (std::vector<double>{-1.0, 0.5}));
  EXPECT_EQ(same.labels, (std::vector<int>{0, 1, 0}));
  const ChainSpec two = split_initial({0.0}, {2}, 0, 0.01, 3);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two.positions[0], -0.005, 1e-15);
  EXPECT_NEAR(two.positions[1], 0.005, 1e-15);
  EXPECT_EQ(two.labels, (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(two.attractive(0));
  const ChainSpec ghost = split_initial({-1.0, 0.0, 1.0}, {1, 0, -1}, 0, 0.1, 2);
  EXPECT_EQ(ghost.size(), 2u);
  EXPECT_THROW(split_initial({0.0}, {3}, 0, 0.1, 3), std::invalid_argument);
}

TEST(SplitInitial, SplittingSolutionsConverge) {
  // Two repulsive fronts leaving the same point: the positions at s = 0.01
  // form a Cauchy sequence as the initial offset shrinks.
  std::vector<double> at;
  for (double off : {1e-2, 1e-3, 1e-4}) {
    const ChainSpec c = split_initial({0.0}, {2}, 0, off, 3);
    const Trajectory t = integrate(triple_model(), c, 0.01);
    at.push_back(t.state_at(0.01).positions[1]);
  }
  const double d1 = std::abs(at[1] - at[0]), d2 = std::abs(at[2] - at[1]);
  EXPECT_GE(d1 / d2, 2.0);
}

TEST(ChainDecompose, Examples) {
  auto dec = chain_decompose(ChainSpec{{0, 1, 2}, {0, 1, 0, 1}});
  ASSERT_EQ(dec.size(), 1u);
  EXPECT_TRUE(dec[0].attractive);
  EXPECT_EQ(dec[0].first, 0u);
  EXPECT_EQ(dec[0].last, 2u);

  dec = chain_decompose(ChainSpec{{0, 1}, {0, 1, 2}});
  ASSERT_EQ(dec.size(), 1u);
  EXPECT_FALSE(dec[0].attractive);

  // (+,+,-,+): repulsive {0,1}, attractive {1,2,3} sharing front 1
  dec = chain_decompose(ChainSpec{{0, 1, 2, 3}, {0, 1, 2, 1, 2}});
  ASSERT_EQ(dec.size(), 2u);
  EXPECT_FALSE(dec[0].attractive);
  EXPECT_EQ(dec[0].first, 0u);
  EXPECT_EQ(dec[0].last, 1u);
  EXPECT_TRUE(dec[1].attractive);
  EXPECT_EQ(dec[1].first, 1u);
  EXPECT_EQ(dec[1].last, 3u);
  EXPECT_TRUE(chain_decompose(ChainSpec{{0.0}, {0, 1}}).empty());
}

TEST(Envelope, TwoBodySlopes) {
  const FrontSystem att = double_model().system({0, 1, 0});
  const Trajectory ta = integrate(double_model(), ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, 1.0);
  const EnvelopeReport ra = envelope_check(ta);
  EXPECT_TRUE(ra.has_attractive);
  EXPECT_FALSE(ra.has_repulsive);
  EXPECT_GE(ra.minus.r2, 1 - 1e-6);
  const double w = att.omega;
  EXPECT_NEAR(ra.minus.slope / (-(w + 2) * 2 * att.couplings[0] / att.masses[0]), 1.0, 1e-4);
  EXPECT_TRUE(ra.consistent);
  EXPECT_FALSE(ra.unbounded);

  const FrontSystem rep = triple_model().system({0, 1, 2});
  OdeOptions opt;
  opt.max_step = 0.01;
  const Trajectory tr = integrate(triple_model(), ChainSpec{{-0.1, 0.1}, {0, 1, 2}}, 1.0, opt);
  const EnvelopeReport rr = envelope_check(tr);
  EXPECT_TRUE(rr.has_repulsive);
  EXPECT_NEAR(rr.plus.slope / ((w + 2) * 2 * std::abs(rep.couplings[0]) / rep.masses[0]), 1.0, 1e-4);
  EXPECT_TRUE(rr.unbounded);
  EXPECT_TRUE(rr.consistent);
}

TEST(Output, TrajectoryCsvAndEventsJson) {
  const Trajectory t = integrate(double_model(), ChainSpec{{-0.5, 0.0, 0.8}, {0, 1, 0, 1}}, 2.0);
  const std::string csv = ::testing::TempDir() + "traj.csv";
  const std::string js = ::testing::TempDir() + "events.json";
  write_trajectory_csv(t, {0.0, 0.5, 1.0, 1.5}, csv);
  write_events_json(t, js);
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "s,l,a_1,a_2,a_3");
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 4);
  std::ifstream ej(js);
  std::stringstream ss;
  ss << ej.rdbuf();
  EXPECT_NE(ss.str().find("S_col"), std::string::npos);
}
