#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gbcm {

struct GraphEdge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

// Undirected simple graph. Node positions are optional and only used for
// plotting.
struct Graph {
  int num_nodes = 0;
  std::vector<GraphEdge> edges;
  std::vector<std::array<double, 2>> positions;
  bool weighted = false;

  int num_edges() const { return static_cast<int>(edges.size()); }
};

// Reversible random walk attached to a connected graph. Edge e is oriented
// from edges[e].u to edges[e].v; edge_weight(e) = pi(u) Q(u,v) = pi(v) Q(v,u).
class MarkovChain {
public:
  int num_nodes() const { return static_cast<int>(pi_.size()); }
  int num_edges() const { return static_cast<int>(tail_.size()); }

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  const Eigen::VectorXd& edge_weight() const { return w_; }
  const Eigen::VectorXd& q_forward() const { return q_fwd_; }
  const Eigen::VectorXd& q_backward() const { return q_bwd_; }
  int tail(int e) const { return tail_[e]; }
  int head(int e) const { return head_[e]; }
  const std::vector<int>& tails() const { return tail_; }
  const std::vector<int>& heads() const { return head_; }

  // -1 when x and y are not adjacent
  int edge_index(int x, int y) const { return index_(x, y); }

private:
  friend MarkovChain build_markov_chain(const Graph& g);

  Eigen::MatrixXd Q_;
  Eigen::VectorXd pi_;
  Eigen::VectorXd w_;
  Eigen::VectorXd q_fwd_, q_bwd_;
  std::vector<int> tail_, head_;
  Eigen::MatrixXi index_;
};

// Validates the graph (simple, connected, positive weights) and builds the
// chain. Throws DomainError naming the failed check.
MarkovChain build_markov_chain(const Graph& g);

// Function on ordered pairs of adjacent nodes, stored per edge as the value
// along the stored orientation and the value against it.
struct EdgeField {
  Eigen::VectorXd forward;
  Eigen::VectorXd backward;

  EdgeField() = default;
  EdgeField(Eigen::VectorXd fwd, Eigen::VectorXd bwd)
      : forward(std::move(fwd)), backward(std::move(bwd)) {}

  static EdgeField skew(const Eigen::VectorXd& values) { return {values, -values}; }
  static EdgeField zeros(int num_edges) {
    return {Eigen::VectorXd::Zero(num_edges), Eigen::VectorXd::Zero(num_edges)};
  }

  int size() const { return static_cast<int>(forward.size()); }
  bool is_skew(double tol = 0.0) const;
  // Value on the ordered pair (x, y); zero for non-adjacent pairs.
  double at(const MarkovChain& chain, int x, int y) const;
};

// Density with respect to pi. Construction checks nonnegativity and unit
// pi-mass.
class Measure {
public:
  static constexpr double kMassTolerance = 1e-8;

  static Measure from_density(const MarkovChain& chain, Eigen::VectorXd density,
                              double tol = kMassTolerance);
  static Measure from_probability(const MarkovChain& chain, const Eigen::VectorXd& prob,
                                  double tol = kMassTolerance);

  const Eigen::VectorXd& density() const { return rho_; }
  Eigen::VectorXd probability(const MarkovChain& chain) const;
  int size() const { return static_cast<int>(rho_.size()); }

private:
  explicit Measure(Eigen::VectorXd rho) : rho_(std::move(rho)) {}
  Eigen::VectorXd rho_;
};

// grad f(x, y) = f(x) - f(y)
EdgeField graph_gradient(const Eigen::VectorXd& f, const MarkovChain& chain);
// div m(x) = 1/2 sum_y (m(y, x) - m(x, y)) Q(x, y)
Eigen::VectorXd graph_divergence(const EdgeField& m, const MarkovChain& chain);
// Skew field given by its forward values.
Eigen::VectorXd graph_divergence_skew(const Eigen::VectorXd& m, const MarkovChain& chain);
// Delta f(x) = sum_y Q(x, y) (f(y) - f(x))
Eigen::VectorXd graph_laplacian(const Eigen::VectorXd& f, const MarkovChain& chain);

double pi_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const MarkovChain& chain);
// <Phi, Psi>_Q = 1/2 sum_{x,y} Phi(x,y) Psi(x,y) Q(x,y) pi(x)
double q_inner(const EdgeField& a, const EdgeField& b, const MarkovChain& chain);
double pi_norm(const Eigen::VectorXd& f, const MarkovChain& chain);

// Hop counts between all pairs.
Eigen::MatrixXd shortest_path_matrix(const Graph& g);
// d_t(x, y)^2 = sum_w (Q^t(x, w) - Q^t(y, w))^2 / pi(w)
Eigen::MatrixXd diffusion_distance_matrix(const MarkovChain& chain, int t);

// Standard families
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph grid_graph(int rows, int cols);
Graph two_point_graph();
Graph triangle_graph();

}  // namespace gbcm
