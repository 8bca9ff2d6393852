#include "gbcm/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbcm/error.hpp"
#include "gbcm/prox.hpp"

namespace gbcm {

TimeGrid::TimeGrid(int steps) : steps_(steps) {
  if (steps < 1) throw DomainError("time grid: need at least one interval");
}

Eigen::VectorXd DiscretizedCurve::density_at(double t) const {
  const int N = steps();
  double s = std::clamp(t, 0.0, 1.0) * N;
  int i = std::min(static_cast<int>(std::floor(s)), N - 1);
  double a = s - i;
  return ((1.0 - a) * rho.row(i) + a * rho.row(i + 1)).transpose();
}

double GeodesicSolution::distance() const { return std::sqrt(action); }

Eigen::VectorXd edge_mean(const Eigen::VectorXd& nu, const AdmissibleMean& mean,
                          const MarkovChain& chain) {
  Eigen::VectorXd th(chain.num_edges());
  for (int e = 0; e < chain.num_edges(); ++e) {
    th[e] = mean_eval(mean, nu[chain.tail(e)], nu[chain.head(e)]);
  }
  return th;
}

namespace {

Eigen::VectorXd clamped_mean(const DiscretizedCurve& c, int i) {
  return c.interval_mean(i).cwiseMax(0.0);
}

}  // namespace

double action(const DiscretizedCurve& curve, const MarkovChain& chain, const AdmissibleMean& mean) {
  const int N = curve.steps();
  const auto& w = chain.edge_weight();
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd th = edge_mean(clamped_mean(curve, i), mean, chain);
    for (int e = 0; e < chain.num_edges(); ++e) {
      double m = curve.m(i, e);
      if (m == 0.0) continue;
      if (th[e] <= 0.0) return std::numeric_limits<double>::infinity();
      total += w[e] * m * m / th[e];
    }
  }
  return total / N;
}

double continuity_residual(const DiscretizedCurve& curve, const MarkovChain& chain) {
  const int N = curve.steps();
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd r = (curve.rho.row(i + 1) - curve.rho.row(i)).transpose() * N +
                        graph_divergence_skew(curve.m.row(i).transpose(), chain);
    worst = std::max(worst, pi_norm(r, chain));
  }
  return worst;
}

GeodesicSolver::GeodesicSolver(const MarkovChain& chain, GeodesicOptions options)
    : chain_(&chain), opt_(options) {
  TimeGrid grid(opt_.steps);
  if (!(opt_.tau > 0.0) || !(opt_.sigma > 0.0) || !(opt_.tau * opt_.sigma < 1.0)) {
    throw DomainError("geodesic: step sizes must satisfy tau, sigma > 0 and tau*sigma < 1");
  }
  if (!(opt_.relax > 0.0) || opt_.relax > 1.0) {
    throw DomainError("geodesic: relaxation must lie in (0, 1]");
  }
  if (!(opt_.tol > 0.0)) throw DomainError("geodesic: tolerance must be positive");
  proj_ = std::make_shared<const AffineProjector>(chain, grid.steps());
}

namespace {

// prox of tau G in the weighted norm: per edge action prox on (m, theta),
// hypograph projection on (theta_mean, rho_minus, rho_plus), identity on the
// node variables.
void prox_g(CPVariables& x, double tau, const AdmissibleMean& mean) {
  const int N = static_cast<int>(x.m.rows());
  const int E = static_cast<int>(x.m.cols());
  for (int e = 0; e < E; ++e) {
    for (int i = 0; i < N; ++i) {
      auto ms = prox_action_pointwise(x.m(i, e), x.theta(i, e), 2.0 * tau);
      x.m(i, e) = ms.m;
      x.theta(i, e) = ms.theta;
      auto hp = project_mean_hypograph(mean, x.theta_mean(i, e), x.rho_minus(i, e),
                                       x.rho_plus(i, e));
      x.theta_mean(i, e) = hp.eta;
      x.rho_minus(i, e) = hp.s;
      x.rho_plus(i, e) = hp.t;
    }
  }
}

// Integral over [0,1] of the squared pi-norm of the piecewise linear
// interpolation of knot differences (zero at both ends).
double knot_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& pi,
                   int N) {
  const int K = static_cast<int>(a.rows());
  Eigen::MatrixXd d = a - b;
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    s += 2.0 * (d.row(k).array().square() * pi.transpose().array()).sum();
    if (k + 1 < K) s += (d.row(k).array() * d.row(k + 1).array() * pi.transpose().array()).sum();
  }
  return s / (3.0 * N);
}

}  // namespace

GeodesicSolution GeodesicSolver::solve(const Eigen::VectorXd& rho_a,
                                       const Eigen::VectorXd& rho_b) const {
  const MarkovChain& c = *chain_;
  const int n = c.num_nodes();
  const int E = c.num_edges();
  const int N = opt_.steps;
  const double tau = opt_.tau, sigma = opt_.sigma;
  if (rho_a.size() != n || rho_b.size() != n) throw DomainError("geodesic: measure size mismatch");

  GeodesicSolution sol;
  sol.mean = opt_.mean;
  if ((rho_a.array() == 0.0).any() || (rho_b.array() == 0.0).any()) {
    sol.warnings.push_back("boundary measure has zero entries; geodesic may touch the boundary");
  }

  if (rho_a == rho_b) {
    // the constant curve is the exact minimizer
    sol.curve.rho = rho_a.transpose().replicate(N + 1, 1);
    sol.curve.m = Eigen::MatrixXd::Zero(N, E);
    sol.converged = true;
    return sol;
  }

  CPVariables x = CPVariables::zeros(N, n, E);
  Eigen::MatrixXd knots(N + 1, n);
  for (int k = 0; k <= N; ++k) {
    double t = static_cast<double>(k) / N;
    knots.row(k) = ((1.0 - t) * rho_a + t * rho_b).transpose();
  }
  x.rho = knots.middleRows(1, N - 1);
  for (int i = 0; i < N; ++i) x.rho_bar.row(i) = 0.5 * (knots.row(i) + knots.row(i + 1));
  for (int e = 0; e < E; ++e) {
    x.rho_minus.col(e) = x.rho_bar.col(c.tail(e));
    x.rho_plus.col(e) = x.rho_bar.col(c.head(e));
    for (int i = 0; i < N; ++i) {
      x.theta(i, e) = x.theta_mean(i, e) =
          mean_eval(opt_.mean, x.rho_minus(i, e), x.rho_plus(i, e));
    }
  }

  CPVariables y = CPVariables::zeros(N, n, E);
  CPVariables xbar = x, z = x, pz = x, xold = x;
  double window_start = std::numeric_limits<double>::infinity();
  bool window_warned = false;
  int it = 0;
  double change = std::numeric_limits<double>::infinity();
  for (it = 1; it <= opt_.max_iters; ++it) {
    // y <- prox_{sigma F*}(y + sigma xbar) = z - sigma P(z / sigma)
    z = y;
    z.axpy(sigma, xbar);
    CPVariables zs = z;
    zs.scale(1.0 / sigma);
    proj_->project(zs, rho_a, rho_b, pz);
    y = z;
    y.axpy(-sigma, pz);

    xold = x;
    x.axpy(-tau, y);
    prox_g(x, tau, opt_.mean);

    xbar = x;
    xbar.axpy(opt_.relax, x).axpy(-opt_.relax, xold);

    change = knot_change(x.rho, xold.rho, c.pi(), N);
    if (it % 100 == 0) {
      if (change > window_start && !window_warned) {
        sol.warnings.push_back("stopping functional increased across a 100-iteration window");
        window_warned = true;
      }
      window_start = change;
    }
    if (it >= opt_.min_iters && change < opt_.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.iterations = std::min(it, opt_.max_iters);
  sol.final_residual = change;

  proj_->project(x, rho_a, rho_b, pz);
  DiscretizedCurve& curve = sol.curve;
  curve.rho.resize(N + 1, n);
  curve.rho.row(0) = rho_a.transpose();
  curve.rho.row(N) = rho_b.transpose();
  if (N > 1) curve.rho.middleRows(1, N - 1) = pz.rho;
  curve.m = pz.m;
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd th = edge_mean(clamped_mean(curve, i), opt_.mean, c);
    for (int e = 0; e < E; ++e) {
      if (th[e] <= 0.0) {
        if (curve.m(i, e) != 0.0) sol.boundary_contact = true;
        curve.m(i, e) = 0.0;
      }
    }
  }
  if ((curve.rho.array() < 0.0).any()) sol.boundary_contact = true;
  sol.action = action(curve, c, opt_.mean);
  if (!sol.converged) sol.warnings.push_back("iteration cap reached before convergence");
  return sol;
}

GeodesicSolution compute_geodesic(const MarkovChain& chain, const Measure& rho_a,
                                  const Measure& rho_b, const GeodesicOptions& options) {
  return GeodesicSolver(chain, options).solve(rho_a.density(), rho_b.density());
}

double wh_distance(const MarkovChain& chain, const Measure& rho_a, const Measure& rho_b,
                   const GeodesicOptions& options) {
  return compute_geodesic(chain, rho_a, rho_b, options).distance();
}

EdgeField initial_momentum(const GeodesicSolution& geo, const MarkovChain& chain) {
  if (!geo.converged) throw DomainError("initial momentum: geodesic did not converge");
  Eigen::VectorXd th = edge_mean(clamped_mean(geo.curve, 0), geo.mean, chain);
  Eigen::VectorXd v(chain.num_edges());
  for (int e = 0; e < chain.num_edges(); ++e) {
    v[e] = th[e] > 0.0 ? geo.curve.m(0, e) / th[e] : 0.0;
  }
  return EdgeField::skew(v);
}

double tangent_inner(const Eigen::VectorXd& nu, const EdgeField& a, const EdgeField& b,
                     const AdmissibleMean& mean, const MarkovChain& chain,
                     TangentWeighting weighting) {
  Eigen::VectorXd th = edge_mean(nu, mean, chain);
  double s = 0.0;
  for (int e = 0; e < chain.num_edges(); ++e) {
    if (weighting == TangentWeighting::chain) {
      s += 0.5 * th[e] *
           (a.forward[e] * b.forward[e] * chain.pi()[chain.tail(e)] * chain.q_forward()[e] +
            a.backward[e] * b.backward[e] * chain.pi()[chain.head(e)] * chain.q_backward()[e]);
    } else {
      s += 0.5 * th[e] * (a.forward[e] * b.forward[e] + a.backward[e] * b.backward[e]);
    }
  }
  return s;
}

}  // namespace gbcm
