#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gbcm/graph.hpp"

namespace gbcm {

Eigen::MatrixXd cost_shortest_path_sq(const Graph& g);
Eigen::MatrixXd cost_diffusion_sq(const MarkovChain& chain, int t);
int graph_diameter(const Graph& g);

struct OTResult {
  double cost = 0.0;
  Eigen::MatrixXd coupling;
  int pivots = 0;
};

// Exact transport LP by the transportation simplex (northwest-corner start,
// MODI potentials, Dantzig pricing with a Bland fallback on degenerate runs).
OTResult exact_ot_lp(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const Eigen::MatrixXd& C);

struct SinkhornResult {
  double cost = 0.0;       // transport term <gamma, C>
  double objective = 0.0;  // <gamma, C> + eps sum gamma (log gamma - 1)
  Eigen::MatrixXd coupling;
  Eigen::VectorXd f, g;    // dual potentials (-inf off the support)
  double marginal_error = 0.0;
  int iterations = 0;
  bool converged = false;
  bool log_domain = false;
};

// Entropic OT. Zero-mass entries are removed before scaling. Runs in the log
// domain when eps < 0.01 max(C).
SinkhornResult sinkhorn(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& C, double eps, double tol = 1e-9,
                        int max_iters = 100000);

struct BregmanResult {
  Eigen::VectorXd barycenter;
  int iterations = 0;
  bool converged = false;
};

// Iterative Bregman projections in the log domain; stops when successive
// (normalized) iterates differ by less than tol in L1.
BregmanResult bregman_barycenter(const std::vector<Eigen::VectorXd>& references,
                                 const Eigen::VectorXd& lambda, const Eigen::MatrixXd& C,
                                 double eps, double tol = 1e-10, int max_iters = 100000);

// The barycenter after exactly L projection rounds and its Jacobian with
// respect to lambda (n x p), by forward-mode differentiation of the unrolled
// iterations.
struct UnrolledBarycenter {
  Eigen::VectorXd barycenter;
  Eigen::MatrixXd jacobian;
};
UnrolledBarycenter unrolled_barycenter(const std::vector<Eigen::VectorXd>& references,
                                       const Eigen::VectorXd& lambda, const Eigen::MatrixXd& C,
                                       double eps, int L);

struct RegressionOptions {
  double eps = 0.01;
  int unroll = 50;
  double lr = 0.1;
  double lr_growth = 2.0;  // applied after each accepted step; 1 keeps lr fixed
  int iters = 500;
};

struct RegressionResult {
  Eigen::VectorXd lambda;
  double loss = 0.0;
  double initial_loss = 0.0;
  int iterations = 0;
  std::vector<double> loss_trace;
};

// Projected gradient on the simplex for || P_L(lambda) - target ||^2, from
// the uniform point; the step is halved whenever the loss fails to decrease
// and grown by lr_growth after every accepted step.
RegressionResult entropic_coordinate_regression(const Eigen::VectorXd& target,
                                                const std::vector<Eigen::VectorXd>& references,
                                                const Eigen::MatrixXd& C,
                                                const RegressionOptions& opt = {});

}  // namespace gbcm
