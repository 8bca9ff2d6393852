#include <gtest/gtest.h>

#include <cmath>

#include "gbcm/error.hpp"
#include "gbcm/experiments.hpp"
#include "gbcm/geodesic.hpp"

using namespace gbcm;

namespace {

CPVariables random_vars(int N, int n, int E, Rng& rng) {
  CPVariables x = CPVariables::zeros(N, n, E);
  for (Eigen::MatrixXd* M : {&x.rho, &x.m, &x.theta, &x.theta_mean, &x.rho_minus, &x.rho_plus, &x.rho_bar})
    for (int i = 0; i < M->size(); ++i) M->data()[i] = 2.0 * rng.uniform() - 1.0;
  return x;
}

double max_abs(const Eigen::MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// On K2 with pi = (1/2, 1/2) and the geometric mean, a curve is described by
// the mass p on node b, and its action is int p'^2 / sqrt(p (1-p)) dt. The
// geodesic has constant speed in that metric: S(p(t)) is affine in t with
// S(p) = int_0^p (u (1-u))^{-1/4} du, and W^2 = (S(p1) - S(p0))^2.
// With u = sin^2(phi) the integrand becomes 2 sqrt(sin(phi) cos(phi)), which
// is smooth, so composite Simpson on phi is accurate.
double speed_integral(double p) {
  double phi = std::asin(std::sqrt(p));
  const int K = 20000;
  double h = phi / K, s = 0.0;
  for (int k = 0; k <= K; ++k) {
    double f = 2.0 * std::sqrt(std::sin(k * h) * std::cos(k * h));
    s += f * (k == 0 || k == K ? 1 : (k % 2 ? 4 : 2));
  }
  return s * h / 3.0;
}

double two_point_mass(double p0, double p1, double t) {
  double target = (1 - t) * speed_integral(p0) + t * speed_integral(p1);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (speed_integral(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Measure k2_measure(const MarkovChain& c, double p) {
  return Measure::from_probability(c, Eigen::Vector2d(1.0 - p, p));
}

}  // namespace

TEST(Projector, FeasibleIdempotentAndOrthogonal) {
  Rng rng(1);
  Graph g = random_connected_graph(6, 0.3, true, rng);
  MarkovChain c = build_markov_chain(g);
  const int N = 7, n = 6, E = g.num_edges();
  AffineProjector P(c, N);
  Eigen::VectorXd a = random_measure(c, rng).density(), b = random_measure(c, rng).density();
  CPVariables x = random_vars(N, n, E, rng), px = CPVariables::zeros(N, n, E);
  P.project(x, a, b, px);

  // continuity equation on the knots with the boundary data
  Eigen::MatrixXd knots(N + 1, n);
  knots.row(0) = a.transpose();
  knots.middleRows(1, N - 1) = px.rho;
  knots.row(N) = b.transpose();
  DiscretizedCurve curve{knots, px.m};
  EXPECT_LT(continuity_residual(curve, c), 1e-11);
  for (int i = 0; i < N; ++i) {
    EXPECT_LT(max_abs(px.rho_bar.row(i) - 0.5 * (knots.row(i) + knots.row(i + 1))), 1e-12);
    for (int e = 0; e < E; ++e) {
      EXPECT_NEAR(px.rho_minus(i, e), px.rho_bar(i, c.tail(e)), 1e-12);
      EXPECT_NEAR(px.rho_plus(i, e), px.rho_bar(i, c.head(e)), 1e-12);
      EXPECT_NEAR(px.theta(i, e), px.theta_mean(i, e), 1e-12);
    }
  }

  CPVariables ppx = CPVariables::zeros(N, n, E);
  P.project(px, a, b, ppx);
  CPVariables diff = ppx;
  diff.axpy(-1.0, px);
  EXPECT_LT(std::sqrt(P.inner(diff, diff)), 1e-11);

  // <x - Px, y - Px> = 0 for y in the affine set
  CPVariables y = CPVariables::zeros(N, n, E);
  P.project(random_vars(N, n, E, rng), a, b, y);
  CPVariables r = x, d = y;
  r.axpy(-1.0, px);
  d.axpy(-1.0, px);
  EXPECT_NEAR(P.inner(r, d), 0.0, 1e-10);
}

TEST(Geodesic, TwoPointInteriorMatchesSpeedIntegral) {
  MarkovChain c = build_markov_chain(two_point_graph());
  GeodesicOptions o;
  o.steps = 40;
  o.tol = 1e-14;
  const double p0 = 0.2, p1 = 0.7;
  GeodesicSolution s = compute_geodesic(c, k2_measure(c, p0), k2_measure(c, p1), o);
  ASSERT_TRUE(s.converged);
  double exact = std::pow(speed_integral(p1) - speed_integral(p0), 2);
  EXPECT_NEAR(s.action, exact, 2e-3 * exact);
  for (double t : {0.25, 0.5, 0.75}) {
    double mass = s.curve.density_at(t)[1] * c.pi()[1];
    EXPECT_NEAR(mass, two_point_mass(p0, p1, t), 1e-3) << t;
  }
}

TEST(Geodesic, TwoPointDiracsCloseToSpeedIntegral) {
  MarkovChain c = build_markov_chain(two_point_graph());
  GeodesicOptions o;
  o.steps = 50;
  o.tol = 1e-13;
  GeodesicSolution s = compute_geodesic(c, k2_measure(c, 0.0), k2_measure(c, 1.0), o);
  ASSERT_TRUE(s.converged);
  double exact = std::pow(speed_integral(1.0), 2);
  EXPECT_NEAR(s.action, exact, 0.02 * exact);
  EXPECT_NEAR(s.curve.density_at(0.5)[1] * 0.5, 0.5, 1e-9);
  EXPECT_NEAR(s.curve.density_at(0.25)[1] * 0.5, two_point_mass(0.0, 1.0, 0.25), 6e-3);
}

TEST(Geodesic, ConstantCurveForEqualEndpoints) {
  Rng rng(4);
  MarkovChain c = build_markov_chain(grid_graph(3, 3));
  Measure a = random_measure(c, rng);
  GeodesicSolution s = compute_geodesic(c, a, a);
  EXPECT_EQ(s.action, 0.0);
  EXPECT_EQ(s.distance(), 0.0);
  EXPECT_TRUE(s.converged);
}

TEST(Geodesic, CurveIsFeasibleAndMassPreserving) {
  Rng rng(8);
  Graph g = grid_graph(3, 4);
  MarkovChain c = build_markov_chain(g);
  Measure a = random_measure(c, rng), b = random_measure(c, rng);
  GeodesicSolution s = compute_geodesic(c, a, b);
  ASSERT_TRUE(s.converged);
  EXPECT_LT((s.curve.density(0) - a.density()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s.curve.density(s.curve.steps()) - b.density()).cwiseAbs().maxCoeff(), 1e-15);
  for (int i = 0; i <= s.curve.steps(); ++i) {
    EXPECT_NEAR(pi_inner(s.curve.density(i), Eigen::VectorXd::Ones(12), c), 1.0, 1e-12);
    EXPECT_GE(s.curve.density(i).minCoeff(), -1e-12);
  }
  EXPECT_LT(continuity_residual(s.curve, c), 1e-10);
  EXPECT_NEAR(action(s.curve, c, s.mean), s.action, 1e-14);
  // straight-line interpolation is feasible only with some flux; the optimum
  // cannot beat zero and is below the action of the initial guess family
  EXPECT_GT(s.action, 0.0);
}

TEST(Geodesic, MetricSymmetryAndTriangle) {
  Rng rng(21);
  MarkovChain c = build_markov_chain(triangle_graph());
  GeodesicOptions o;
  o.steps = 20;
  o.tol = 1e-10;
  for (int k = 0; k < 5; ++k) {
    Measure a = random_measure(c, rng), b = random_measure(c, rng), d = random_measure(c, rng);
    double ab = wh_distance(c, a, b, o), ba = wh_distance(c, b, a, o);
    EXPECT_NEAR(ab, ba, 1e-4 * ab);
    double ad = wh_distance(c, a, d, o), db = wh_distance(c, d, b, o);
    EXPECT_LE(ab, ad + db + 1e-3);
  }
}

TEST(Geodesic, LogarithmicMeanConverges) {
  Rng rng(5);
  MarkovChain c = build_markov_chain(cycle_graph(5));
  GeodesicOptions o;
  o.mean = AdmissibleMean{MeanKind::logarithmic};
  Measure a = random_measure(c, rng), b = random_measure(c, rng);
  GeodesicSolution s = compute_geodesic(c, a, b, o);
  EXPECT_TRUE(s.converged);
  GeodesicOptions og;
  double dg = wh_distance(c, a, b, og);
  // logarithmic >= geometric pointwise, so its action is smaller
  EXPECT_LE(s.distance(), dg * (1 + 1e-3));
  EXPECT_EQ(s.mean.kind, MeanKind::logarithmic);
}

TEST(Geodesic, InitialMomentumRequiresConvergence) {
  Rng rng(6);
  MarkovChain c = build_markov_chain(grid_graph(2, 3));
  GeodesicOptions o;
  o.max_iters = 12;
  o.tol = 1e-16;
  GeodesicSolution s = compute_geodesic(c, random_measure(c, rng), random_measure(c, rng), o);
  EXPECT_FALSE(s.converged);
  EXPECT_FALSE(s.warnings.empty());
  EXPECT_THROW(initial_momentum(s, c), DomainError);
}

TEST(Geodesic, InitialMomentumPointsAlongTheCurve) {
  Rng rng(9);
  MarkovChain c = build_markov_chain(grid_graph(3, 3));
  GeodesicOptions o;
  o.steps = 20;
  Measure a = random_measure(c, rng), b = random_measure(c, rng);
  GeodesicSolution s = compute_geodesic(c, a, b, o);
  EdgeField mom = initial_momentum(s, c);
  EXPECT_TRUE(mom.is_skew(1e-14));
  // a short step along div(theta(a) mom) approximates rho(h)
  Eigen::VectorXd theta = edge_mean(a.density(), o.mean, c);
  double h = 1.0 / o.steps;
  Eigen::VectorXd step = a.density() - h * graph_divergence_skew(mom.forward.cwiseProduct(theta), c);
  double err = pi_norm(step - s.curve.density(1), c);
  double move = pi_norm(s.curve.density(1) - a.density(), c);
  EXPECT_LT(err, 0.2 * move);
  // |m|^2 at the start approximates the squared distance
  EXPECT_NEAR(tangent_inner(a.density(), mom, mom, o.mean, c), s.action, 0.15 * s.action);
}

TEST(Geodesic, RejectsBadOptions) {
  MarkovChain c = build_markov_chain(path_graph(3));
  GeodesicOptions o;
  o.tau = 1.0;
  o.sigma = 1.0;
  EXPECT_THROW(GeodesicSolver(c, o), DomainError);
  o = {};
  o.steps = 0;
  EXPECT_THROW(GeodesicSolver(c, o), DomainError);
}
