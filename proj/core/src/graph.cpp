#include "gbcm/graph.hpp"

#include <cmath>
#include <queue>
#include <sstream>

#include "gbcm/error.hpp"

namespace gbcm {

namespace {

std::vector<std::vector<int>> adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (const auto& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

std::vector<int> bfs_hops(const std::vector<std::vector<int>>& adj, int src) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int y : adj[x]) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  return dist;
}

}  // namespace

MarkovChain build_markov_chain(const Graph& g) {
  const int n = g.num_nodes;
  if (n < 2) throw DomainError("graph: need at least two nodes");

  Eigen::MatrixXi index = Eigen::MatrixXi::Constant(n, n, -1);
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edges[e];
    if (ed.u < 0 || ed.u >= n || ed.v < 0 || ed.v >= n) {
      std::ostringstream os;
      os << "graph: edge " << e << " references unknown node";
      throw DomainError(os.str());
    }
    if (ed.u == ed.v) throw DomainError("graph: self-loop at node " + std::to_string(ed.u));
    if (index(ed.u, ed.v) >= 0) {
      std::ostringstream os;
      os << "graph: duplicate edge (" << ed.u << ", " << ed.v << ")";
      throw DomainError(os.str());
    }
    double w = g.weighted ? ed.weight : 1.0;
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError("graph: non-positive weight on edge " + std::to_string(e));
    }
    index(ed.u, ed.v) = e;
    index(ed.v, ed.u) = e;
    deg[ed.u] += w;
    deg[ed.v] += w;
  }
  for (int x = 0; x < n; ++x) {
    if (deg[x] == 0.0) throw DomainError("graph: not connected (node " + std::to_string(x) + " has no edges)");
  }
  auto hops = bfs_hops(adjacency(g), 0);
  for (int x = 0; x < n; ++x) {
    if (hops[x] < 0) throw DomainError("graph: not connected (node " + std::to_string(x) + ")");
  }

  MarkovChain c;
  const int E = g.num_edges();
  c.pi_ = deg / deg.sum();
  c.Q_ = Eigen::MatrixXd::Zero(n, n);
  c.w_.resize(E);
  c.q_fwd_.resize(E);
  c.q_bwd_.resize(E);
  c.tail_.resize(E);
  c.head_.resize(E);
  for (int e = 0; e < E; ++e) {
    const auto& ed = g.edges[e];
    double w = g.weighted ? ed.weight : 1.0;
    c.Q_(ed.u, ed.v) = w / deg[ed.u];
    c.Q_(ed.v, ed.u) = w / deg[ed.v];
    c.q_fwd_[e] = c.Q_(ed.u, ed.v);
    c.q_bwd_[e] = c.Q_(ed.v, ed.u);
    c.w_[e] = c.pi_[ed.u] * c.q_fwd_[e];
    c.tail_[e] = ed.u;
    c.head_[e] = ed.v;
  }
  c.index_ = std::move(index);
  return c;
}

bool EdgeField::is_skew(double tol) const {
  return ((forward + backward).cwiseAbs().array() <= tol).all();
}

double EdgeField::at(const MarkovChain& chain, int x, int y) const {
  int e = chain.edge_index(x, y);
  if (e < 0) return 0.0;
  return chain.tail(e) == x ? forward[e] : backward[e];
}

Measure Measure::from_density(const MarkovChain& chain, Eigen::VectorXd density, double tol) {
  if (density.size() != chain.num_nodes()) {
    throw DomainError("measure: size " + std::to_string(density.size()) + " does not match " +
                      std::to_string(chain.num_nodes()) + " nodes");
  }
  for (int x = 0; x < density.size(); ++x) {
    if (!(density[x] >= 0.0) || !std::isfinite(density[x])) {
      throw DomainError("measure: negative density at node " + std::to_string(x));
    }
  }
  double mass = density.dot(chain.pi());
  if (std::abs(mass - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "measure: total mass " << mass << " differs from 1";
    throw DomainError(os.str());
  }
  return Measure(std::move(density));
}

Measure Measure::from_probability(const MarkovChain& chain, const Eigen::VectorXd& prob,
                                  double tol) {
  if (prob.size() != chain.num_nodes()) {
    throw DomainError("measure: size " + std::to_string(prob.size()) + " does not match " +
                      std::to_string(chain.num_nodes()) + " nodes");
  }
  return from_density(chain, prob.cwiseQuotient(chain.pi()), tol);
}

Eigen::VectorXd Measure::probability(const MarkovChain& chain) const {
  return rho_.cwiseProduct(chain.pi());
}

EdgeField graph_gradient(const Eigen::VectorXd& f, const MarkovChain& chain) {
  const int E = chain.num_edges();
  Eigen::VectorXd fwd(E);
  for (int e = 0; e < E; ++e) fwd[e] = f[chain.tail(e)] - f[chain.head(e)];
  return EdgeField::skew(fwd);
}

Eigen::VectorXd graph_divergence(const EdgeField& m, const MarkovChain& chain) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(chain.num_nodes());
  for (int e = 0; e < chain.num_edges(); ++e) {
    double diff = m.backward[e] - m.forward[e];
    d[chain.tail(e)] += 0.5 * diff * chain.q_forward()[e];
    d[chain.head(e)] -= 0.5 * diff * chain.q_backward()[e];
  }
  return d;
}

Eigen::VectorXd graph_divergence_skew(const Eigen::VectorXd& m, const MarkovChain& chain) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(chain.num_nodes());
  const auto& qf = chain.q_forward();
  const auto& qb = chain.q_backward();
  for (int e = 0; e < chain.num_edges(); ++e) {
    d[chain.tail(e)] -= m[e] * qf[e];
    d[chain.head(e)] += m[e] * qb[e];
  }
  return d;
}

Eigen::VectorXd graph_laplacian(const Eigen::VectorXd& f, const MarkovChain& chain) {
  return chain.Q() * f - f;
}

double pi_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const MarkovChain& chain) {
  return (f.array() * g.array() * chain.pi().array()).sum();
}

double pi_norm(const Eigen::VectorXd& f, const MarkovChain& chain) {
  return std::sqrt(pi_inner(f, f, chain));
}

double q_inner(const EdgeField& a, const EdgeField& b, const MarkovChain& chain) {
  const auto& w = chain.edge_weight();
  return 0.5 * ((a.forward.array() * b.forward.array() + a.backward.array() * b.backward.array()) *
                w.array())
                   .sum();
}

Eigen::MatrixXd shortest_path_matrix(const Graph& g) {
  auto adj = adjacency(g);
  Eigen::MatrixXd d(g.num_nodes, g.num_nodes);
  for (int x = 0; x < g.num_nodes; ++x) {
    auto row = bfs_hops(adj, x);
    for (int y = 0; y < g.num_nodes; ++y) {
      if (row[y] < 0) throw DomainError("graph: not connected (node " + std::to_string(y) + ")");
      d(x, y) = row[y];
    }
  }
  return d;
}

Eigen::MatrixXd diffusion_distance_matrix(const MarkovChain& chain, int t) {
  if (t < 0) throw DomainError("diffusion distance: negative time");
  const int n = chain.num_nodes();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < t; ++k) P = P * chain.Q();
  Eigen::VectorXd inv_pi = chain.pi().cwiseInverse();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      double s = ((P.row(x) - P.row(y)).array().square() * inv_pi.transpose().array()).sum();
      d(x, y) = d(y, x) = std::sqrt(std::max(0.0, s));
    }
  }
  return d;
}

Graph path_graph(int n) {
  Graph g;
  g.num_nodes = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
  for (int i = 0; i < n; ++i) g.positions.push_back({double(i), 0.0});
  return g;
}

Graph cycle_graph(int n) {
  Graph g;
  g.num_nodes = n;
  for (int i = 0; i < n; ++i) g.edges.push_back({i, (i + 1) % n, 1.0});
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * M_PI * i / n + M_PI / 2.0;
    g.positions.push_back({std::cos(a), std::sin(a)});
  }
  return g;
}

Graph complete_graph(int n) {
  Graph g = cycle_graph(n);
  g.edges.clear();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j, 1.0});
  return g;
}

Graph grid_graph(int rows, int cols) {
  Graph g;
  g.num_nodes = rows * cols;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) g.edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) g.edges.push_back({id(r, c), id(r + 1, c), 1.0});
      g.positions.push_back({double(c), double(r)});
    }
  }
  return g;
}

Graph two_point_graph() { return path_graph(2); }

Graph triangle_graph() { return cycle_graph(3); }

}  // namespace gbcm
