#include <benchmark/benchmark.h>

#include "gbcm/barycenter.hpp"
#include "gbcm/experiments.hpp"
#include "gbcm/geodesic.hpp"
#include "gbcm/prox.hpp"
#include "gbcm/simplex.hpp"
#include "gbcm/static_ot.hpp"

using namespace gbcm;

static void BM_ProxPointwise(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> in(3 * 1024);
  for (auto& v : in) v = 4.0 * rng.uniform() - 2.0;
  size_t i = 0;
  for (auto _ : state) {
    auto r = prox_action_pointwise(in[i], in[i + 1], 0.05 + std::abs(in[i + 2]));
    benchmark::DoNotOptimize(r);
    i = (i + 3) % in.size();
  }
}
BENCHMARK(BM_ProxPointwise);

static void BM_Hypograph(benchmark::State& state) {
  AdmissibleMean mean{static_cast<MeanKind>(state.range(0))};
  Rng rng(2);
  std::vector<double> in(3 * 1024);
  for (auto& v : in) v = 3.0 * rng.uniform() - 1.0;
  size_t i = 0;
  for (auto _ : state) {
    auto r = project_mean_hypograph(mean, in[i], in[i + 1], in[i + 2]);
    benchmark::DoNotOptimize(r);
    i = (i + 3) % in.size();
  }
}
BENCHMARK(BM_Hypograph)->Arg(0)->Arg(1);

static void BM_Geodesic(benchmark::State& state) {
  MarkovChain c = build_markov_chain(grid_graph(4, 4));
  Rng rng(3);
  Measure a = random_measure(c, rng), b = random_measure(c, rng);
  GeodesicOptions o;
  o.steps = static_cast<int>(state.range(0));
  o.tol = 1e-8;
  GeodesicSolver solver(c, o);
  int iters = 0;
  for (auto _ : state) {
    GeodesicSolution s = solver.solve(a.density(), b.density());
    iters = s.iterations;
    benchmark::DoNotOptimize(s.action);
  }
  state.counters["cp_iterations"] = iters;
}
BENCHMARK(BM_Geodesic)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_Sinkhorn(benchmark::State& state) {
  Graph g = grid_graph(7, 7);
  MarkovChain c = build_markov_chain(g);
  Eigen::MatrixXd C = cost_shortest_path_sq(g);
  Rng rng(4);
  Eigen::VectorXd p = random_measure(c, rng).probability(c), q = random_measure(c, rng).probability(c);
  double eps = 1e-3 * state.range(0) * C.maxCoeff();
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn(p, q, C, eps).cost);
}
BENCHMARK(BM_Sinkhorn)->Arg(100)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_ExactLP(benchmark::State& state) {
  Graph g = grid_graph(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  MarkovChain c = build_markov_chain(g);
  Eigen::MatrixXd C = cost_shortest_path_sq(g);
  Rng rng(5);
  Eigen::VectorXd p = random_measure(c, rng).probability(c), q = random_measure(c, rng).probability(c);
  for (auto _ : state) benchmark::DoNotOptimize(exact_ot_lp(p, q, C).cost);
}
BENCHMARK(BM_ExactLP)->Arg(4)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_SimplexQP(benchmark::State& state) {
  Rng rng(6);
  const int p = static_cast<int>(state.range(0));
  Eigen::MatrixXd B(p, p);
  for (int i = 0; i < B.size(); ++i) B.data()[i] = 2.0 * rng.uniform() - 1.0;
  Eigen::MatrixXd A = B * B.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(solve_simplex_qp(A).value);
}
BENCHMARK(BM_SimplexQP)->Arg(3)->Arg(10);
BENCHMARK_MAIN();
