#include "gbcm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gbcm/error.hpp"

namespace gbcm {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int p = static_cast<int>(v.size());
  if (p == 0) throw DomainError("simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + p);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (int k = 0; k < p; ++k) {
    cum += u[k];
    double t = (cum - 1.0) / (k + 1);
    if (u[k] - t > 0.0) shift = t;
  }
  return (v.array() - shift).cwiseMax(0.0).matrix();
}

bool on_simplex(const Eigen::VectorXd& lambda, double tol) {
  return lambda.size() > 0 && (lambda.array() >= 0.0).all() && std::abs(lambda.sum() - 1.0) <= tol;
}

SimplexQPResult solve_simplex_qp(const Eigen::MatrixXd& A, double tol, int max_iters) {
  const int p = static_cast<int>(A.rows());
  if (p == 0 || A.cols() != p) throw DomainError("simplex qp: matrix must be square and nonempty");
  Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  double lmax = es.eigenvalues().maxCoeff();
  // Working with A / lambda_max makes the iterates, and the stopping test on
  // the step length, independent of the scale of A.
  if (lmax > 0.0) S /= lmax;
  else S.setZero();

  SimplexQPResult r;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(p, 1.0 / p);
  Eigen::VectorXd best = x;
  double best_val = x.dot(S * x);
  // gradient 2 S x, step 1 / (2 lambda_max(S)) = 1/2
  for (r.iterations = 0; r.iterations < max_iters;) {
    Eigen::VectorXd next = project_simplex(x - S * x);
    r.pg_norm = (next - x).norm();
    x = next;
    ++r.iterations;
    double val = x.dot(S * x);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
    if (r.pg_norm < tol) {
      r.converged = true;
      break;
    }
  }
  // Polish: on the detected support the minimizer solves S_FF y = mu 1. When
  // that system is regular and the KKT conditions hold, the closed form is
  // exact up to rounding, where the projected-gradient iterate is only within
  // its step tolerance.
  std::vector<int> F;
  for (int i = 0; i < p; ++i)
    if (best[i] > 0.0) F.push_back(i);
  if (!F.empty() && lmax > 0.0) {
    const int f = static_cast<int>(F.size());
    Eigen::MatrixXd SF(f, f);
    for (int i = 0; i < f; ++i)
      for (int j = 0; j < f; ++j) SF(i, j) = S(F[i], F[j]);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(SF);
    Eigen::VectorXd y = ldlt.solve(Eigen::VectorXd::Ones(f));
    bool regular = ldlt.info() == Eigen::Success && ldlt.isPositive() && y.sum() > 0.0 &&
                   (SF * y - Eigen::VectorXd::Ones(f)).norm() < 1e-10;
    if (regular) {
      y /= y.sum();
      Eigen::VectorXd cand = Eigen::VectorXd::Zero(p);
      for (int i = 0; i < f; ++i) cand[F[i]] = y[i];
      Eigen::VectorXd g = S * cand;
      double mu = cand.dot(g);
      bool kkt = (y.array() > 0.0).all();
      for (int i = 0; i < p && kkt; ++i) kkt = g[i] >= mu - 1e-12;
      if (kkt && cand.dot(S * cand) <= best_val + 1e-14) best = cand;
    }
  }
  r.lambda = best;
  r.value = best.dot(A * best);
  return r;
}

}  // namespace gbcm
