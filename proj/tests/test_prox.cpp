#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gbcm/experiments.hpp"
#include "gbcm/prox.hpp"
#include "prox_oracle.hpp"

using namespace gbcm;
using oracle::prox_objective;

namespace {

double hyp_dist2(const HypographPoint& p, double e, double s, double t) {
  return (p.eta - e) * (p.eta - e) + (p.s - s) * (p.s - s) + (p.t - t) * (p.t - t);
}

}  // namespace

// Zooming lattice search down to 1e-6; it never looks at the analytic answer.
TEST(Prox, MatchesGridSearch) {
  Rng rng(99);
  for (int k = 0; k < 100; ++k) {
    double m0 = 4.0 * rng.uniform() - 2.0;
    double th0 = 4.0 * rng.uniform() - 2.0;
    double tau = 0.05 + 0.95 * rng.uniform();
    MomentumSlack a = prox_action_pointwise(m0, th0, tau);
    MomentumSlack f = oracle::prox_grid_search(m0, th0, tau);
    EXPECT_NEAR(a.m, f.m, 1e-4) << m0 << " " << th0 << " " << tau;
    EXPECT_NEAR(a.theta, f.theta, 1e-4) << m0 << " " << th0 << " " << tau;
    EXPECT_LE(prox_objective(a.m, a.theta, m0, th0, tau), prox_objective(f.m, f.theta, m0, th0, tau) + 1e-12);
  }
}

TEST(Prox, BranchPoints) {
  // theta0 <= -m0^2 / (2 tau) ... collapses to the origin
  MomentumSlack z = prox_action_pointwise(0.5, -10.0, 0.5);
  EXPECT_EQ(z.m, 0.0);
  EXPECT_EQ(z.theta, 0.0);
  // m0 = 0 keeps m = 0 and clips theta
  MomentumSlack p = prox_action_pointwise(0.0, 1.5, 0.3);
  EXPECT_EQ(p.m, 0.0);
  EXPECT_NEAR(p.theta, 1.5, 1e-15);
  MomentumSlack q = prox_action_pointwise(0.0, -1.5, 0.3);
  EXPECT_EQ(q.theta, 0.0);
}

TEST(Hypograph, SearchMatchesBruteForce) {
  Rng rng(5);
  for (MeanKind kind : {MeanKind::geometric, MeanKind::logarithmic}) {
    AdmissibleMean mean{kind};
    for (int k = 0; k < 30; ++k) {
      double e = 4 * rng.uniform() - 1, s = 3 * rng.uniform() - 1, t = 3 * rng.uniform() - 1;
      HypographPoint p = project_mean_hypograph_search(mean, e, s, t);
      EXPECT_GE(p.s, 0.0);
      EXPECT_GE(p.t, 0.0);
      EXPECT_LE(p.eta, mean(p.s, p.t) + 1e-12);
      // brute force over the set: grid in (s, t), best eta is clamp(e, mean)
      double best = std::numeric_limits<double>::infinity();
      for (double ss = 0; ss <= 4.0; ss += 0.005)
        for (double tt = 0; tt <= 4.0; tt += 0.005) {
          double ee = std::min(e, mean(ss, tt));
          best = std::min(best, hyp_dist2({ee, ss, tt}, e, s, t));
        }
      EXPECT_LE(hyp_dist2(p, e, s, t), best + 1e-9);
      EXPECT_NEAR(std::sqrt(hyp_dist2(p, e, s, t)), std::sqrt(best), 1e-2);
    }
  }
}

TEST(Hypograph, GeometricClosedFormMatchesSearch) {
  Rng rng(17);
  AdmissibleMean g{MeanKind::geometric};
  double worst = 0.0;
  for (int k = 0; k < 20000; ++k) {
    double e = 6 * rng.uniform() - 2, s = 6 * rng.uniform() - 3, t = 6 * rng.uniform() - 3;
    HypographPoint a = project_mean_hypograph(g, e, s, t);
    HypographPoint b = project_mean_hypograph_search(g, e, s, t);
    worst = std::max({worst, std::abs(a.eta - b.eta), std::abs(a.s - b.s), std::abs(a.t - b.t)});
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Hypograph, PointsInsideAreFixed) {
  AdmissibleMean g{MeanKind::geometric};
  HypographPoint p = project_mean_hypograph(g, 0.5, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(p.eta, 0.5);
  EXPECT_DOUBLE_EQ(p.s, 1.0);
  EXPECT_DOUBLE_EQ(p.t, 2.0);
}
