#include "gbcm/error.hpp"
#include "gbcm/geodesic.hpp"

namespace gbcm {

CPVariables CPVariables::zeros(int steps, int n, int E) {
  CPVariables v;
  v.rho = Eigen::MatrixXd::Zero(steps - 1, n);
  v.m = Eigen::MatrixXd::Zero(steps, E);
  v.theta = Eigen::MatrixXd::Zero(steps, E);
  v.theta_mean = Eigen::MatrixXd::Zero(steps, E);
  v.rho_minus = Eigen::MatrixXd::Zero(steps, E);
  v.rho_plus = Eigen::MatrixXd::Zero(steps, E);
  v.rho_bar = Eigen::MatrixXd::Zero(steps, n);
  return v;
}

CPVariables& CPVariables::axpy(double a, const CPVariables& x) {
  rho += a * x.rho;
  m += a * x.m;
  theta += a * x.theta;
  theta_mean += a * x.theta_mean;
  rho_minus += a * x.rho_minus;
  rho_plus += a * x.rho_plus;
  rho_bar += a * x.rho_bar;
  return *this;
}

CPVariables& CPVariables::scale(double a) {
  rho *= a;
  m *= a;
  theta *= a;
  theta_mean *= a;
  rho_minus *= a;
  rho_plus *= a;
  rho_bar *= a;
  return *this;
}

AffineProjector::AffineProjector(const MarkovChain& chain, int steps)
    : chain_(&chain), N_(steps), h_(1.0 / steps) {
  if (steps < 1) throw DomainError("time grid: need at least one interval");
  const int K = N_ - 1;
  const int n = chain.num_nodes();

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    T(k, k) = 2.0;
    if (k + 1 < K) T(k, k + 1) = T(k + 1, k) = 0.5;
  }
  tinv_ = K > 0 ? Eigen::MatrixXd(T.inverse()) : Eigen::MatrixXd(0, 0);

  // G maps interior knots to interval differences rho_{i+1} - rho_i.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N_, K);
  for (int i = 0; i < N_; ++i) {
    if (i < K) G(i, i) = 1.0;
    if (i >= 1) G(i, i - 1) = -1.0;
  }
  Eigen::MatrixXd M = G * tinv_ * G.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_t(M);
  U_ = es_t.eigenvectors();
  lam_ = es_t.eigenvalues();

  Eigen::VectorXd sq = chain.pi().cwiseSqrt();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - chain.Q();
  S = sq.asDiagonal() * S * sq.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_x(S);
  if (es_x.info() != Eigen::Success) throw DomainError("projection: eigensolver failed");
  const Eigen::VectorXd& sig = es_x.eigenvalues();
  if (n > 1 && !(sig[1] > 1e-13)) {
    throw DomainError("projection: singular constraint system (graph not connected?)");
  }
  W_ = sq.asDiagonal() * es_x.eigenvectors();
  Winv_ = es_x.eigenvectors().transpose() * sq.cwiseInverse().asDiagonal();

  denom_.resize(N_, n);
  for (int j = 0; j < N_; ++j)
    for (int k = 0; k < n; ++k) denom_(j, k) = lam_[j] + h_ * h_ * sig[k];
  // Constant in time and space: the multiplier is only defined up to it.
  denom_(0, 0) = 0.0;
}

void AffineProjector::project(const CPVariables& in, const Eigen::VectorXd& rho_a,
                              const Eigen::VectorXd& rho_b, CPVariables& out) const {
  const MarkovChain& c = *chain_;
  const int n = c.num_nodes();
  const int E = c.num_edges();
  const int K = N_ - 1;
  const auto& w = c.edge_weight();
  const auto& pi = c.pi();

  out.theta = 0.5 * (in.theta + in.theta_mean);
  out.theta_mean = out.theta;

  // Collapse the slack copies of each interval mean onto its node.
  Eigen::MatrixXd cbar = in.rho_bar.array().rowwise() * pi.transpose().array();
  for (int e = 0; e < E; ++e) {
    cbar.col(c.tail(e)) += w[e] * in.rho_minus.col(e);
    cbar.col(c.head(e)) += w[e] * in.rho_plus.col(e);
  }
  cbar.array().rowwise() /= (2.0 * pi.transpose().array());

  Eigen::MatrixXd b(K, n);
  for (int k = 0; k < K; ++k) b.row(k) = in.rho.row(k) + cbar.row(k) + cbar.row(k + 1);
  if (K > 0) {
    b.row(0) -= 0.5 * rho_a.transpose();
    b.row(K - 1) -= 0.5 * rho_b.transpose();
  }

  // R = G T^-1 b + g + h div m0
  Eigen::MatrixXd tb = tinv_ * b;
  Eigen::MatrixXd R(N_, n);
  for (int i = 0; i < N_; ++i) {
    R.row(i).setZero();
    if (i < K) R.row(i) += tb.row(i);
    if (i >= 1) R.row(i) -= tb.row(i - 1);
  }
  R.row(0) -= rho_a.transpose();
  R.row(N_ - 1) += rho_b.transpose();
  const auto& qf = c.q_forward();
  const auto& qb = c.q_backward();
  for (int e = 0; e < E; ++e) {
    R.col(c.tail(e)) -= h_ * qf[e] * in.m.col(e);
    R.col(c.head(e)) += h_ * qb[e] * in.m.col(e);
  }

  Eigen::MatrixXd psi = U_.transpose() * R * W_;
  for (int j = 0; j < N_; ++j)
    for (int k = 0; k < n; ++k) psi(j, k) = denom_(j, k) > 0.0 ? psi(j, k) / denom_(j, k) : 0.0;
  Eigen::MatrixXd phi = U_ * psi * Winv_;

  // rho = T^-1 (b - G^t phi); (G^t phi)_k = phi_k - phi_{k+1}
  if (K > 0) {
    Eigen::MatrixXd gp(K, n);
    for (int k = 0; k < K; ++k) gp.row(k) = phi.row(k) - phi.row(k + 1);
    out.rho = tinv_ * (b - gp);
  } else {
    out.rho.resize(0, n);
  }

  out.m = in.m;
  for (int e = 0; e < E; ++e) out.m.col(e) += h_ * (phi.col(c.tail(e)) - phi.col(c.head(e)));

  out.rho_bar.resize(N_, n);
  for (int i = 0; i < N_; ++i) {
    auto lo = i == 0 ? rho_a.transpose() : Eigen::RowVectorXd(out.rho.row(i - 1));
    auto hi = i == K ? rho_b.transpose() : Eigen::RowVectorXd(out.rho.row(i));
    out.rho_bar.row(i) = 0.5 * (lo + hi);
  }
  out.rho_minus.resize(N_, E);
  out.rho_plus.resize(N_, E);
  for (int e = 0; e < E; ++e) {
    out.rho_minus.col(e) = out.rho_bar.col(c.tail(e));
    out.rho_plus.col(e) = out.rho_bar.col(c.head(e));
  }
}

double AffineProjector::inner(const CPVariables& a, const CPVariables& b) const {
  const auto& pi = chain_->pi();
  const auto& w = chain_->edge_weight();
  auto node = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return ((x.array() * y.array()).rowwise() * pi.transpose().array()).sum();
  };
  auto edge = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return ((x.array() * y.array()).rowwise() * w.transpose().array()).sum();
  };
  return h_ * (node(a.rho, b.rho) + node(a.rho_bar, b.rho_bar) + edge(a.m, b.m) +
               edge(a.theta, b.theta) + edge(a.theta_mean, b.theta_mean) +
               edge(a.rho_minus, b.rho_minus) + edge(a.rho_plus, b.rho_plus));
}

}  // namespace gbcm
