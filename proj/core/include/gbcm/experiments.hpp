#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbcm/graph.hpp"

namespace gbcm {

// 64-bit generator with a portable double conversion, so a seed gives the
// same draws with any standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // uniform on (0, 1)
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(uniform() * n); }
  std::uint64_t next() { return eng_(); }

private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);
// Independent stream for one trial of an experiment.
Rng trial_rng(std::uint64_t seed, int trial);

// n uniform draws, normalized, divided by pi.
Measure random_measure(const MarkovChain& chain, Rng& rng);
// Mass w on the closed neighborhood of center, 1 elsewhere, normalized.
Measure concentrated_measure(const Graph& g, const MarkovChain& chain, int center, double w = 100.0);
// Uniform on the simplex.
Eigen::VectorXd random_weights(int p, Rng& rng);
// Random spanning tree plus each remaining pair with probability extra_p;
// weights uniform on [0.5, 2] when weighted.
Graph random_connected_graph(int n, double extra_p, bool weighted, Rng& rng);

// "grid:RxC", "path:n", "cycle:n", "complete:n", "triangle", "two-point",
// otherwise a graph JSON file.
Graph make_graph(const std::string& source);

struct ExperimentConfig {
  std::string name;
  std::string graph;
  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;

  // descent / geodesic hyperparameters
  double eps = 0.25;
  double tol_bary = 1e-10;
  double tol_geodesic = 1e-10;
  int steps = 10;
  std::string mean = "geometric";
  int max_outer = 10000;
  int references = 3;

  // two_point
  std::vector<double> ts;
  int fine_steps = 1000;
  double fine_tol = 1e-12;

  // geodesic_consistency
  bool fixed_pair = false;

  // static_dynamic
  std::vector<double> lambda;
  std::vector<double> eps_reg_factors = {0.1, 0.01, 0.001};
  int diffusion_t = 12;  // 0: graph diameter
  double concentration = 100.0;
  int unroll = 50;

  // coordinate_recovery sweep
  bool sweep = false;
  std::vector<double> sweep_tol_geodesic = {1e-4, 1e-6, 1e-8};
  std::vector<int> sweep_steps = {5, 10, 20};
  double sweep_eps = 0.05;
  double sweep_tol_bary = 1e-8;
};

const std::vector<std::string>& experiment_names();
// Defaults for the named experiment; unknown names are an error.
ExperimentConfig default_config(const std::string& name);
// Defaults overridden by the keys of a JSON object (same names as the fields).
ExperimentConfig parse_experiment_config(const std::string& name, const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

struct ErrorRecord {
  int trial = 0;
  std::string metric;
  double value = 0.0;
  std::string params;  // "key=value;key=value"
};

struct ExperimentResult {
  std::string name;
  Graph graph;
  std::vector<ErrorRecord> records;  // sorted by trial id
  std::string summary_json;
  // per-trial step-norm sequences, for log-linear plots
  std::vector<std::vector<double>> traces;
  // probability vectors worth rendering on the graph layout
  std::vector<std::pair<std::string, Eigen::VectorXd>> measures;
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

ExperimentResult exp_two_point(const ExperimentConfig& cfg);
ExperimentResult exp_geodesic_consistency(const ExperimentConfig& cfg);
ExperimentResult exp_static_dynamic_comparison(const ExperimentConfig& cfg);
ExperimentResult exp_initialization(const ExperimentConfig& cfg);
ExperimentResult exp_coordinate_recovery(const ExperimentConfig& cfg);
ExperimentResult exp_convergence(const ExperimentConfig& cfg);

// header "trial,metric,value,params"; values with 17 significant digits
std::string records_to_csv(const std::vector<ErrorRecord>& records);

}  // namespace gbcm
