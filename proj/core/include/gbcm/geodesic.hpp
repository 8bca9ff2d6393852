#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbcm/graph.hpp"
#include "gbcm/mean.hpp"

namespace gbcm {

class TimeGrid {
public:
  explicit TimeGrid(int steps);
  int steps() const { return steps_; }
  double h() const { return 1.0 / steps_; }
  double time(int i) const { return static_cast<double>(i) / steps_; }

private:
  int steps_;
};

// Piecewise linear densities at the N+1 knots and piecewise constant fluxes
// on the N intervals. m(i, e) is the flux across edge e along its stored
// orientation during interval i, so that
//   rho_{i+1} - rho_i + h div m_i = 0.
struct DiscretizedCurve {
  Eigen::MatrixXd rho;  // (N+1) x n
  Eigen::MatrixXd m;    // N x E

  int steps() const { return static_cast<int>(m.rows()); }
  Eigen::VectorXd density(int i) const { return rho.row(i).transpose(); }
  Eigen::VectorXd interval_mean(int i) const {
    return 0.5 * (rho.row(i) + rho.row(i + 1)).transpose();
  }
  EdgeField momentum(int i) const { return EdgeField::skew(m.row(i).transpose()); }
  // Linear interpolation between knots, t in [0, 1].
  Eigen::VectorXd density_at(double t) const;
};

enum class TangentWeighting {
  chain,     // include Q(x,y) pi(x), matching the action
  unweighted // bare 1/2 sum theta Phi Psi
};

struct GeodesicOptions {
  AdmissibleMean mean;
  int steps = 10;
  double tol = 1e-10;
  int max_iters = 200000;
  int min_iters = 10;
  // tau * sigma = 0.99; the ratio was tuned on grid and triangle pilots
  double tau = 0.05;
  double sigma = 19.8;
  double relax = 1.0;
};

struct GeodesicSolution {
  DiscretizedCurve curve;
  AdmissibleMean mean;
  double action = 0.0;
  int iterations = 0;
  double final_residual = 0.0;  // last value of the stopping functional
  bool converged = false;
  bool boundary_contact = false;
  std::vector<std::string> warnings;

  double distance() const;
};

// h * sum_i sum_e w_e m_ie^2 / theta(rho_bar_i(u), rho_bar_i(v)); +inf when a
// nonzero flux crosses an edge with theta = 0.
double action(const DiscretizedCurve& curve, const MarkovChain& chain, const AdmissibleMean& mean);

// max_i || (rho_{i+1} - rho_i)/h + div m_i ||_pi
double continuity_residual(const DiscretizedCurve& curve, const MarkovChain& chain);

// Primal variables of the splitting, one row per interval (rho: interior
// knots only). Edge slacks: theta for the action, theta_mean for the mean
// hypograph, rho_minus / rho_plus the interval means at the edge endpoints.
struct CPVariables {
  Eigen::MatrixXd rho;         // (N-1) x n
  Eigen::MatrixXd m;           // N x E
  Eigen::MatrixXd theta;       // N x E
  Eigen::MatrixXd theta_mean;  // N x E
  Eigen::MatrixXd rho_minus;   // N x E
  Eigen::MatrixXd rho_plus;    // N x E
  Eigen::MatrixXd rho_bar;     // N x n

  static CPVariables zeros(int steps, int n, int E);
  CPVariables& axpy(double a, const CPVariables& x);  // this += a x
  CPVariables& scale(double a);
};

// Orthogonal projection (in the weighted inner product of the splitting
// space) onto the affine set: discrete continuity equation, boundary
// conditions, slack consistency. Factorized once per (chain, grid).
class AffineProjector {
public:
  AffineProjector(const MarkovChain& chain, int steps);

  int steps() const { return N_; }
  void project(const CPVariables& in, const Eigen::VectorXd& rho_a, const Eigen::VectorXd& rho_b,
               CPVariables& out) const;
  double inner(const CPVariables& a, const CPVariables& b) const;

private:
  const MarkovChain* chain_;
  int N_;
  double h_;
  Eigen::MatrixXd tinv_;   // inverse of tridiag(1/2, 2, 1/2), (N-1)^2
  Eigen::MatrixXd U_;      // eigenvectors of G T^-1 G^t
  Eigen::VectorXd lam_;
  Eigen::MatrixXd W_;      // Pi^{1/2} V
  Eigen::MatrixXd Winv_;   // V^t Pi^{-1/2}
  Eigen::MatrixXd denom_;  // lam_j + h^2 sigma_k, null mode marked 0
};

class GeodesicSolver {
public:
  GeodesicSolver(const MarkovChain& chain, GeodesicOptions options);

  const GeodesicOptions& options() const { return opt_; }
  const MarkovChain& chain() const { return *chain_; }
  GeodesicSolution solve(const Eigen::VectorXd& rho_a, const Eigen::VectorXd& rho_b) const;

private:
  const MarkovChain* chain_;
  GeodesicOptions opt_;
  std::shared_ptr<const AffineProjector> proj_;
};

GeodesicSolution compute_geodesic(const MarkovChain& chain, const Measure& rho_a,
                                  const Measure& rho_b, const GeodesicOptions& options = {});

double wh_distance(const MarkovChain& chain, const Measure& rho_a, const Measure& rho_b,
                   const GeodesicOptions& options = {});

// Tangent representative at the start point: the first-interval flux divided
// by theta of the first interval mean (zero where theta vanishes). Moving
// the start density along div(theta(nu) * field) follows the geodesic.
EdgeField initial_momentum(const GeodesicSolution& geo, const MarkovChain& chain);

// <Phi, Psi>_nu = 1/2 sum_{x,y} theta(nu(x), nu(y)) Phi(x,y) Psi(x,y) [Q(x,y) pi(x)]
double tangent_inner(const Eigen::VectorXd& nu, const EdgeField& a, const EdgeField& b,
                     const AdmissibleMean& mean, const MarkovChain& chain,
                     TangentWeighting weighting = TangentWeighting::chain);

// theta(nu(u_e), nu(v_e)) for every edge
Eigen::VectorXd edge_mean(const Eigen::VectorXd& nu, const AdmissibleMean& mean,
                          const MarkovChain& chain);

}  // namespace gbcm
