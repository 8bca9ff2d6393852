#pragma once

#include <Eigen/Dense>

namespace gbcm {

// Euclidean projection onto {x >= 0, sum x = 1} (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

bool on_simplex(const Eigen::VectorXd& lambda, double tol = 1e-12);

struct SimplexQPResult {
  Eigen::VectorXd lambda;
  double value = 0.0;
  int iterations = 0;
  double pg_norm = 0.0;  // norm of the projected-gradient step at exit
  bool converged = false;
};

// min lambda^t A lambda over the simplex by projected gradient from the
// uniform point with step 1 / (2 lambda_max(A)).
SimplexQPResult solve_simplex_qp(const Eigen::MatrixXd& A, double tol = 1e-12,
                                 int max_iters = 100000);

}  // namespace gbcm
