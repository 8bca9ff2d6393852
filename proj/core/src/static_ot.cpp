#include "gbcm/static_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gbcm/error.hpp"
#include "gbcm/simplex.hpp"

namespace gbcm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_probability(const Eigen::VectorXd& p, const char* what) {
  for (int i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      throw DomainError(std::string(what) + ": negative or non-finite entry " + std::to_string(i));
    }
  }
}

double log_sum_exp(const double* a, int n, int stride) {
  double mx = kNegInf;
  for (int k = 0; k < n; ++k) mx = std::max(mx, a[k * stride]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(a[k * stride] - mx);
  return mx + std::log(s);
}

}  // namespace

Eigen::MatrixXd cost_shortest_path_sq(const Graph& g) {
  return shortest_path_matrix(g).array().square().matrix();
}

Eigen::MatrixXd cost_diffusion_sq(const MarkovChain& chain, int t) {
  return diffusion_distance_matrix(chain, t).array().square().matrix();
}

int graph_diameter(const Graph& g) {
  return static_cast<int>(std::lround(shortest_path_matrix(g).maxCoeff()));
}

// ---------------------------------------------------------------------------
// Transportation simplex

OTResult exact_ot_lp(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(p.size()), m = static_cast<int>(q.size());
  if (n == 0 || m == 0) throw DomainError("ot lp: empty marginal");
  if (C.rows() != n || C.cols() != m) throw DomainError("ot lp: cost shape mismatch");
  check_probability(p, "ot lp: first marginal");
  check_probability(q, "ot lp: second marginal");
  if (std::abs(p.sum() - q.sum()) > 1e-10) throw DomainError("ot lp: infeasible, masses differ");

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> basic =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, m, false);
  std::vector<std::vector<int>> row_adj(n), col_adj(m);
  auto add_basic = [&](int i, int j) {
    basic(i, j) = true;
    row_adj[i].push_back(j);
    col_adj[j].push_back(i);
  };
  auto remove_basic = [&](int i, int j) {
    basic(i, j) = false;
    row_adj[i].erase(std::find(row_adj[i].begin(), row_adj[i].end(), j));
    col_adj[j].erase(std::find(col_adj[j].begin(), col_adj[j].end(), i));
  };

  // Northwest corner: n + m - 1 basic cells, degenerate zeros included.
  {
    Eigen::VectorXd s = p, d = q;
    int i = 0, j = 0;
    while (true) {
      double v = std::min(s[i], d[j]);
      x(i, j) = v;
      add_basic(i, j);
      s[i] -= v;
      d[j] -= v;
      if (i == n - 1 && j == m - 1) break;
      if (i == n - 1) ++j;
      else if (j == m - 1) ++i;
      else if (s[i] < d[j]) ++i;
      else ++j;
    }
    // Rounding leftovers go to the last cell so both marginals stay exact.
    x(n - 1, m - 1) += std::max(0.0, 0.5 * (s[n - 1] + d[m - 1]));
  }

  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  const double price_tol = 1e-12 * scale;
  Eigen::VectorXd u(n), v(m);
  std::vector<int> parent(n + m);
  std::vector<char> seen(n + m);
  int degenerate_streak = 0;
  const long max_pivots = 50L * n * m + 1000;
  OTResult res;

  for (long piv = 0;; ++piv) {
    if (piv > max_pivots) throw DomainError("ot lp: pivot limit exceeded");
    // Potentials u_i + v_j = C_ij on the basis tree (nodes: rows 0..n-1,
    // columns n..n+m-1).
    std::fill(seen.begin(), seen.end(), 0);
    std::queue<int> bfs;
    u[0] = 0.0;
    seen[0] = 1;
    bfs.push(0);
    while (!bfs.empty()) {
      int a = bfs.front();
      bfs.pop();
      if (a < n) {
        for (int j : row_adj[a])
          if (!seen[n + j]) {
            v[j] = C(a, j) - u[a];
            seen[n + j] = 1;
            bfs.push(n + j);
          }
      } else {
        int j = a - n;
        for (int i : col_adj[j])
          if (!seen[i]) {
            u[i] = C(i, j) - v[j];
            seen[i] = 1;
            bfs.push(i);
          }
      }
    }

    int ei = -1, ej = -1;
    double best = -price_tol;
    bool bland = degenerate_streak > 50;
    for (int i = 0; i < n && !(bland && ei >= 0); ++i) {
      for (int j = 0; j < m; ++j) {
        if (basic(i, j)) continue;
        double r = C(i, j) - u[i] - v[j];
        if (r < best) {
          best = bland ? -price_tol : r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;

    // Tree path from row ei to column ej.
    std::fill(seen.begin(), seen.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    seen[ei] = 1;
    bfs = {};
    bfs.push(ei);
    while (!bfs.empty()) {
      int a = bfs.front();
      bfs.pop();
      if (a == n + ej) break;
      if (a < n) {
        for (int j : row_adj[a])
          if (!seen[n + j]) {
            seen[n + j] = 1;
            parent[n + j] = a;
            bfs.push(n + j);
          }
      } else {
        for (int i : col_adj[a - n])
          if (!seen[i]) {
            seen[i] = 1;
            parent[i] = a;
            bfs.push(i);
          }
      }
    }
    // Walk back from column ej: cells alternate -, +, -, ... ending with -.
    std::vector<std::pair<int, int>> cells;
    for (int a = n + ej; a != ei; a = parent[a]) {
      int b = parent[a];
      if (a >= n) cells.push_back({b, a - n});
      else cells.push_back({a, b - n});
    }
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (size_t k = 0; k < cells.size(); k += 2) {
      auto [i, j] = cells[k];
      double val = x(i, j);
      if (val < theta || (val == theta && i * m + j < cells[leave].first * m + cells[leave].second)) {
        theta = val;
        leave = static_cast<int>(k);
      }
    }
    x(ei, ej) = theta;
    for (size_t k = 0; k < cells.size(); ++k) {
      auto [i, j] = cells[k];
      x(i, j) += (k % 2 == 0) ? -theta : theta;
    }
    auto [li, lj] = cells[leave];
    x(li, lj) = 0.0;
    remove_basic(li, lj);
    add_basic(ei, ej);
    degenerate_streak = theta == 0.0 ? degenerate_streak + 1 : 0;
    ++res.pivots;
  }
  res.coupling = x.cwiseMax(0.0);
  res.cost = (res.coupling.array() * C.array()).sum();
  return res;
}

// ---------------------------------------------------------------------------
// Sinkhorn

SinkhornResult sinkhorn(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& C, double eps, double tol, int max_iters) {
  if (!(eps > 0.0)) throw DomainError("sinkhorn: regularization must be positive");
  check_probability(p, "sinkhorn: first marginal");
  check_probability(q, "sinkhorn: second marginal");
  if (C.rows() != p.size() || C.cols() != q.size()) throw DomainError("sinkhorn: cost shape mismatch");
  if (std::abs(p.sum() - q.sum()) > 1e-8) throw DomainError("sinkhorn: masses differ");

  std::vector<int> I, J;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) I.push_back(i);
  for (int j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) J.push_back(j);
  const int n = static_cast<int>(I.size()), m = static_cast<int>(J.size());
  Eigen::MatrixXd c(n, m);
  Eigen::VectorXd a(n), b(m);
  for (int i = 0; i < n; ++i) {
    a[i] = p[I[i]];
    for (int j = 0; j < m; ++j) c(i, j) = C(I[i], J[j]);
  }
  for (int j = 0; j < m; ++j) b[j] = q[J[j]];

  SinkhornResult r;
  r.log_domain = eps < 0.01 * C.maxCoeff();
  Eigen::MatrixXd gamma(n, m);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);

  if (r.log_domain) {
    Eigen::MatrixXd tmp;
    Eigen::VectorXd la = a.array().log(), lb = b.array().log();
    for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
      tmp = ((-c).rowwise() + g.transpose()) / eps;  // n x m
      for (int i = 0; i < n; ++i) f[i] = eps * (la[i] - log_sum_exp(&tmp(i, 0), m, n));
      tmp = ((-c).colwise() + f) / eps;
      for (int j = 0; j < m; ++j) g[j] = eps * (lb[j] - log_sum_exp(&tmp(0, j), n, 1));
      gamma = (((-c).colwise() + f).rowwise() + g.transpose()).array() / eps;
      gamma = gamma.array().exp();
      r.marginal_error = (gamma.rowwise().sum() - a).cwiseAbs().sum();
      if (r.marginal_error < tol) {
        r.converged = true;
        break;
      }
    }
  } else {
    Eigen::MatrixXd K = (-c / eps).array().exp();
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n), v = Eigen::VectorXd::Ones(m);
    for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
      u = a.cwiseQuotient(K * v);
      v = b.cwiseQuotient(K.transpose() * u);
      r.marginal_error = (u.cwiseProduct(K * v) - a).cwiseAbs().sum();
      if (r.marginal_error < tol) {
        r.converged = true;
        break;
      }
    }
    gamma = u.asDiagonal() * K * v.asDiagonal();
    f = eps * u.array().log();
    g = eps * v.array().log();
  }
  r.iterations = std::min(r.iterations, max_iters);

  r.coupling = Eigen::MatrixXd::Zero(p.size(), q.size());
  r.f = Eigen::VectorXd::Constant(p.size(), kNegInf);
  r.g = Eigen::VectorXd::Constant(q.size(), kNegInf);
  double ent = 0.0;
  for (int i = 0; i < n; ++i) {
    r.f[I[i]] = f[i];
    for (int j = 0; j < m; ++j) {
      double x = gamma(i, j);
      r.coupling(I[i], J[j]) = x;
      if (x > 0.0) ent += x * (std::log(x) - 1.0);
    }
  }
  for (int j = 0; j < m; ++j) r.g[J[j]] = g[j];
  r.cost = (r.coupling.array() * C.array()).sum();
  r.objective = r.cost + eps * ent;
  return r;
}

// ---------------------------------------------------------------------------
// Bregman barycenters

namespace {

struct BregmanSetup {
  int n = 0;
  int p = 0;
  Eigen::MatrixXd lK;                 // -C / eps
  std::vector<Eigen::VectorXd> lr;    // log references
};

BregmanSetup bregman_setup(const std::vector<Eigen::VectorXd>& refs, const Eigen::VectorXd& lambda,
                           const Eigen::MatrixXd& C, double eps) {
  if (refs.empty()) throw DomainError("bregman: need at least one reference");
  if (lambda.size() != static_cast<int>(refs.size())) {
    throw DomainError("bregman: weight count does not match reference count");
  }
  if (!(eps > 0.0)) throw DomainError("bregman: regularization must be positive");
  BregmanSetup s;
  s.n = static_cast<int>(refs[0].size());
  s.p = static_cast<int>(refs.size());
  if (C.rows() != s.n || C.cols() != s.n) throw DomainError("bregman: cost must be square n x n");
  s.lK = -C / eps;
  for (const auto& r : refs) {
    if (r.size() != s.n) throw DomainError("bregman: references on different supports");
    check_probability(r, "bregman: reference");
    s.lr.push_back(r.array().log());
  }
  return s;
}

// One projection round for reference s: returns log(K^T u_s) given log v_s,
// and optionally the softmax weights needed for differentiation.
void bregman_round(const BregmanSetup& s, int k, const Eigen::VectorXd& lv, Eigen::VectorXd& lu,
                   Eigen::VectorXd& lktu, Eigen::MatrixXd* Wrow, Eigen::MatrixXd* Wcol) {
  const int n = s.n;
  Eigen::MatrixXd t = s.lK.rowwise() + lv.transpose();
  lu.resize(n);
  for (int i = 0; i < n; ++i) {
    double l = log_sum_exp(&t(i, 0), n, n);
    lu[i] = s.lr[k][i] - l;
    if (Wrow) Wrow->row(i) = (t.row(i).array() - l).exp();
  }
  t = s.lK.colwise() + lu;
  lktu.resize(n);
  for (int j = 0; j < n; ++j) {
    double l = log_sum_exp(&t(0, j), n, 1);
    lktu[j] = l;
    if (Wcol) {
      for (int i = 0; i < n; ++i) (*Wcol)(j, i) = lu[i] == kNegInf ? 0.0 : std::exp(t(i, j) - l);
    }
  }
}

Eigen::VectorXd normalized_exp(const Eigen::VectorXd& lb) {
  double mx = lb.maxCoeff();
  Eigen::VectorXd b = (lb.array() - mx).exp();
  return b / b.sum();
}

}  // namespace

BregmanResult bregman_barycenter(const std::vector<Eigen::VectorXd>& references,
                                 const Eigen::VectorXd& lambda, const Eigen::MatrixXd& C,
                                 double eps, double tol, int max_iters) {
  BregmanSetup s = bregman_setup(references, lambda, C, eps);
  std::vector<Eigen::VectorXd> lv(s.p, Eigen::VectorXd::Zero(s.n)), lktu(s.p);
  Eigen::VectorXd lu, prev = Eigen::VectorXd::Constant(s.n, 1.0 / s.n), b;
  BregmanResult r;
  for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
    Eigen::VectorXd lb = Eigen::VectorXd::Zero(s.n);
    for (int k = 0; k < s.p; ++k) {
      bregman_round(s, k, lv[k], lu, lktu[k], nullptr, nullptr);
      if (lambda[k] != 0.0) lb += lambda[k] * lktu[k];
    }
    for (int k = 0; k < s.p; ++k) lv[k] = lb - lktu[k];
    b = normalized_exp(lb);
    if ((b - prev).cwiseAbs().sum() < tol) {
      r.converged = true;
      break;
    }
    prev = b;
  }
  r.iterations = std::min(r.iterations, max_iters);
  r.barycenter = b;
  return r;
}

UnrolledBarycenter unrolled_barycenter(const std::vector<Eigen::VectorXd>& references,
                                       const Eigen::VectorXd& lambda, const Eigen::MatrixXd& C,
                                       double eps, int L) {
  if (L < 1) throw DomainError("unrolled barycenter: depth must be at least 1");
  BregmanSetup s = bregman_setup(references, lambda, C, eps);
  const int n = s.n, p = s.p;
  std::vector<Eigen::VectorXd> lv(p, Eigen::VectorXd::Zero(n)), lktu(p);
  std::vector<Eigen::MatrixXd> dlv(p, Eigen::MatrixXd::Zero(n, p)), dktu(p);
  Eigen::MatrixXd Wrow(n, n), Wcol(n, n);
  Eigen::VectorXd lu, lb;
  Eigen::MatrixXd dlb;
  for (int it = 0; it < L; ++it) {
    lb = Eigen::VectorXd::Zero(n);
    dlb = Eigen::MatrixXd::Zero(n, p);
    for (int k = 0; k < p; ++k) {
      bregman_round(s, k, lv[k], lu, lktu[k], &Wrow, &Wcol);
      Eigen::MatrixXd dlu = -Wrow * dlv[k];
      for (int i = 0; i < n; ++i)
        if (lu[i] == kNegInf) dlu.row(i).setZero();
      dktu[k] = Wcol * dlu;
      lb += lambda[k] * lktu[k];
      dlb += lambda[k] * dktu[k];
      dlb.col(k) += lktu[k];
    }
    for (int k = 0; k < p; ++k) {
      lv[k] = lb - lktu[k];
      dlv[k] = dlb - dktu[k];
    }
  }
  UnrolledBarycenter out;
  out.barycenter = normalized_exp(lb);
  const Eigen::VectorXd& P = out.barycenter;
  Eigen::RowVectorXd mean_d = P.transpose() * dlb;
  out.jacobian = P.asDiagonal() * (dlb.rowwise() - mean_d);
  return out;
}

RegressionResult entropic_coordinate_regression(const Eigen::VectorXd& target,
                                                const std::vector<Eigen::VectorXd>& references,
                                                const Eigen::MatrixXd& C,
                                                const RegressionOptions& opt) {
  const int p = static_cast<int>(references.size());
  if (p == 0) throw DomainError("regression: need at least one reference");
  if (target.size() != references[0].size()) throw DomainError("regression: target size mismatch");
  auto eval = [&](const Eigen::VectorXd& lam, Eigen::VectorXd* grad) {
    auto ub = unrolled_barycenter(references, lam, C, opt.eps, opt.unroll);
    Eigen::VectorXd r = ub.barycenter - target;
    if (grad) *grad = 2.0 * ub.jacobian.transpose() * r;
    return r.squaredNorm();
  };

  RegressionResult res;
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(p, 1.0 / p), grad;
  double loss = eval(lam, &grad);
  res.initial_loss = loss;
  res.loss_trace.push_back(loss);
  double lr = opt.lr;
  for (res.iterations = 0; res.iterations < opt.iters && lr > 1e-14; ++res.iterations) {
    Eigen::VectorXd cand = project_simplex(lam - lr * grad);
    Eigen::VectorXd g2;
    double l2 = eval(cand, &g2);
    if (l2 < loss) {
      lam = cand;
      loss = l2;
      grad = g2;
      res.loss_trace.push_back(loss);
      lr *= opt.lr_growth;
    } else {
      lr *= 0.5;
    }
  }
  res.lambda = lam;
  res.loss = loss;
  return res;
}

}  // namespace gbcm
