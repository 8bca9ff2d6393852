#include "gbcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gbcm/barycenter.hpp"
#include "gbcm/error.hpp"
#include "gbcm/geodesic.hpp"
#include "gbcm/io.hpp"
#include "gbcm/parallel.hpp"
#include "gbcm/static_ot.hpp"
#include "gbcm/stats.hpp"

namespace gbcm {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng trial_rng(std::uint64_t seed, int trial) {
  return Rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(trial)));
}

Measure random_measure(const MarkovChain& chain, Rng& rng) {
  Eigen::VectorXd p(chain.num_nodes());
  for (int i = 0; i < p.size(); ++i) p[i] = rng.uniform();
  p /= p.sum();
  return Measure::from_density(chain, p.cwiseQuotient(chain.pi()));
}

Measure concentrated_measure(const Graph& g, const MarkovChain& chain, int center, double w) {
  if (center < 0 || center >= g.num_nodes) throw DomainError("concentrated measure: bad center");
  if (!(w > 1.0)) throw DomainError("concentrated measure: w must exceed 1");
  Eigen::VectorXd p = Eigen::VectorXd::Ones(g.num_nodes);
  p[center] = w;
  for (const auto& e : g.edges) {
    if (e.u == center) p[e.v] = w;
    if (e.v == center) p[e.u] = w;
  }
  p /= p.sum();
  return Measure::from_density(chain, p.cwiseQuotient(chain.pi()));
}

Eigen::VectorXd random_weights(int p, Rng& rng) {
  Eigen::VectorXd l(p);
  for (int i = 0; i < p; ++i) l[i] = -std::log(rng.uniform());
  return l / l.sum();
}

Graph random_connected_graph(int n, double extra_p, bool weighted, Rng& rng) {
  Graph g;
  g.num_nodes = n;
  g.weighted = weighted;
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
  auto add = [&](int u, int v) {
    double w = weighted ? 0.5 + 1.5 * rng.uniform() : 1.0;
    g.edges.push_back({u, v, w});
    adj(u, v) = adj(v, u) = 1;
  };
  for (int i = 1; i < n; ++i) add(rng.below(i), i);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!adj(u, v) && rng.uniform() < extra_p) add(u, v);
  return g;
}

Graph make_graph(const std::string& source) {
  auto arg = [&](size_t pos) {
    try {
      return std::stoi(source.substr(pos));
    } catch (...) {
      throw DomainError("graph source '" + source + "': bad size");
    }
  };
  if (source == "triangle") return triangle_graph();
  if (source == "two-point") return two_point_graph();
  if (source.rfind("grid:", 0) == 0) {
    size_t x = source.find('x');
    if (x == std::string::npos) throw DomainError("graph source '" + source + "': expected grid:RxC");
    return grid_graph(std::stoi(source.substr(5, x - 5)), arg(x + 1));
  }
  if (source.rfind("path:", 0) == 0) return path_graph(arg(5));
  if (source.rfind("cycle:", 0) == 0) return cycle_graph(arg(6));
  if (source.rfind("complete:", 0) == 0) return complete_graph(arg(9));
  return read_graph(source);
}

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"two_point",      "geodesic_consistency",
                                                 "static_dynamic", "initialization",
                                                 "coordinate_recovery", "convergence"};
  return names;
}

ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "two_point") {
    c.graph = "two-point";
    c.steps = 50;
    for (int k = 0; k <= 10; ++k) c.ts.push_back(k / 10.0);
    c.trials = static_cast<int>(c.ts.size());
  } else if (name == "geodesic_consistency") {
    c.graph = "triangle";
    c.trials = 100;
    c.steps = 50;
    c.references = 2;
  } else if (name == "static_dynamic") {
    c.graph = "grid:7x7";
    c.lambda = {0.5, 0.3, 0.2};
    c.tol_geodesic = 1e-9;
  } else if (name == "initialization") {
    c.graph = "grid:4x4";
    c.references = 4;
    c.steps = 16;
    c.tol_geodesic = 1e-6;
  } else if (name == "coordinate_recovery") {
    c.graph = "grid:4x4";
    c.trials = 100;
    c.eps = 0.5;
    c.tol_geodesic = 1e-9;
  } else if (name == "convergence") {
    c.graph = "grid:4x4";
    c.trials = 100;
    c.tol_geodesic = 1e-9;
  } else {
    throw DomainError("unknown experiment '" + name + "'");
  }
  return c;
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& name, const std::string& text) {
  ExperimentConfig c = default_config(name);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("experiment config: malformed json: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("experiment config: expected a JSON object");
  static const std::vector<std::string> known = {
      "graph", "trials", "seed", "threads", "eps", "tol_bary", "tol_geodesic", "steps", "mean",
      "max_outer", "references", "ts", "fine_steps", "fine_tol", "fixed_pair", "lambda",
      "eps_reg_factors", "diffusion_t", "concentration", "unroll", "sweep",
      "sweep_tol_geodesic", "sweep_steps", "sweep_eps", "sweep_tol_bary"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw DomainError("experiment config: unknown key '" + it.key() + "'");
    }
  }
  try {
    take(j, "graph", c.graph);
    take(j, "trials", c.trials);
    take(j, "seed", c.seed);
    take(j, "threads", c.threads);
    take(j, "eps", c.eps);
    take(j, "tol_bary", c.tol_bary);
    take(j, "tol_geodesic", c.tol_geodesic);
    take(j, "steps", c.steps);
    take(j, "mean", c.mean);
    take(j, "max_outer", c.max_outer);
    take(j, "references", c.references);
    take(j, "ts", c.ts);
    take(j, "fine_steps", c.fine_steps);
    take(j, "fine_tol", c.fine_tol);
    take(j, "fixed_pair", c.fixed_pair);
    take(j, "lambda", c.lambda);
    take(j, "eps_reg_factors", c.eps_reg_factors);
    take(j, "diffusion_t", c.diffusion_t);
    take(j, "concentration", c.concentration);
    take(j, "unroll", c.unroll);
    take(j, "sweep", c.sweep);
    take(j, "sweep_tol_geodesic", c.sweep_tol_geodesic);
    take(j, "sweep_steps", c.sweep_steps);
    take(j, "sweep_eps", c.sweep_eps);
    take(j, "sweep_tol_bary", c.sweep_tol_bary);
  } catch (const json::exception& e) {
    throw DomainError(std::string("experiment config: ") + e.what());
  }
  if (name == "two_point" && j.contains("ts") && !j.contains("trials")) {
    c.trials = static_cast<int>(c.ts.size());
  }
  if (c.trials < 1) throw DomainError("experiment config: trials must be at least 1");
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j = {{"name", c.name},
            {"graph", c.graph},
            {"trials", c.trials},
            {"seed", c.seed},
            {"threads", c.threads},
            {"eps", c.eps},
            {"tol_bary", c.tol_bary},
            {"tol_geodesic", c.tol_geodesic},
            {"steps", c.steps},
            {"mean", c.mean},
            {"max_outer", c.max_outer},
            {"references", c.references}};
  if (c.name == "two_point") {
    j["ts"] = c.ts;
    j["fine_steps"] = c.fine_steps;
    j["fine_tol"] = c.fine_tol;
  }
  if (c.name == "geodesic_consistency") j["fixed_pair"] = c.fixed_pair;
  if (c.name == "static_dynamic") {
    j["lambda"] = c.lambda;
    j["eps_reg_factors"] = c.eps_reg_factors;
    j["diffusion_t"] = c.diffusion_t;
    j["concentration"] = c.concentration;
    j["unroll"] = c.unroll;
  }
  if (c.name == "coordinate_recovery") {
    j["sweep"] = c.sweep;
    j["sweep_tol_geodesic"] = c.sweep_tol_geodesic;
    j["sweep_steps"] = c.sweep_steps;
    j["sweep_eps"] = c.sweep_eps;
    j["sweep_tol_bary"] = c.sweep_tol_bary;
  }
  return j.dump(1) + "\n";
}

std::string records_to_csv(const std::vector<ErrorRecord>& records) {
  std::string s = "trial,metric,value,params\n";
  for (const auto& r : records) {
    s += std::to_string(r.trial) + "," + r.metric + "," + format_double(r.value) + "," + r.params +
         "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Drivers

namespace {

std::string fmt_param(const std::string& key, double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << key << "=" << v;
  return ss.str();
}

GeodesicOptions geodesic_options(const ExperimentConfig& c, int steps, double tol) {
  GeodesicOptions o;
  o.mean = AdmissibleMean::parse(c.mean);
  o.steps = steps;
  o.tol = tol;
  return o;
}

BarycenterProblem base_problem(const ExperimentConfig& c) {
  BarycenterProblem b;
  b.eps = c.eps;
  b.tol = c.tol_bary;
  b.max_outer = c.max_outer;
  b.geodesic = geodesic_options(c, c.steps, c.tol_geodesic);
  return b;
}

double relative_pi_error(const Eigen::VectorXd& x, const Eigen::VectorXd& ref,
                         const MarkovChain& chain) {
  return pi_norm(x - ref, chain) / pi_norm(ref, chain);
}

struct TrialOut {
  std::vector<ErrorRecord> records;
  std::vector<double> trace;
  std::vector<std::string> warnings;
};

// Runs every trial (concurrently when threads > 1), then concatenates in
// trial order. A trial that throws contributes a "failed" record.
ExperimentResult run_trials(const ExperimentConfig& c, const Graph& g,
                            const std::function<TrialOut(int)>& body) {
  std::vector<TrialOut> outs(c.trials);
  parallel_for(c.trials, c.threads, [&](int k) {
    try {
      outs[k] = body(k);
    } catch (const DomainError& e) {
      outs[k].records.push_back({k, "failed", 1.0, ""});
      outs[k].warnings.push_back("trial " + std::to_string(k) + ": " + e.what());
    }
  });
  ExperimentResult r;
  r.name = c.name;
  r.graph = g;
  for (int k = 0; k < c.trials; ++k) {
    for (auto& rec : outs[k].records) {
      rec.trial = k;
      r.records.push_back(std::move(rec));
    }
    if (!outs[k].trace.empty()) r.traces.push_back(std::move(outs[k].trace));
    for (auto& w : outs[k].warnings) r.warnings.push_back("trial " + std::to_string(k) + ": " + w);
  }
  return r;
}

json metric_summary(const std::vector<ErrorRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : records) {
    if (!by.count(r.metric)) order.push_back(r.metric);
    by[r.metric].push_back(r.value);
  }
  json out = json::object();
  for (const auto& m : order) {
    const auto& v = by[m];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    out[m] = {{"count", v.size()},
              {"min", quantile(v, 0.0)},
              {"q25", quantile(v, 0.25)},
              {"median", quantile(v, 0.5)},
              {"q75", quantile(v, 0.75)},
              {"max", quantile(v, 1.0)},
              {"mean", mean}};
  }
  return out;
}

void finish(ExperimentResult& r, const ExperimentConfig& c, json extra = json::object()) {
  json s;
  s["experiment"] = c.name;
  s["trials"] = c.trials;
  s["seed"] = c.seed;
  s["metrics"] = metric_summary(r.records);
  s["warning_count"] = r.warnings.size();
  for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
  r.summary_json = s.dump(1) + "\n";
}

std::vector<std::string> take_warnings(const SynthesisResult& s) { return s.trace.warnings; }

}  // namespace

ExperimentResult exp_two_point(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  if (g.num_nodes != 2) throw DomainError("two_point: graph must have two nodes");
  MarkovChain chain = build_markov_chain(g);
  const Eigen::VectorXd& pi = chain.pi();
  Eigen::VectorXd da(2), db(2);
  da << 1.0 / pi[0], 0.0;
  db << 0.0, 1.0 / pi[1];
  Measure a = Measure::from_density(chain, da), b = Measure::from_density(chain, db);
  if (static_cast<int>(c.ts.size()) < c.trials) throw DomainError("two_point: need one t per trial");

  GeodesicSolution fine = compute_geodesic(chain, a, b, geodesic_options(c, c.fine_steps, c.fine_tol));
  GeodesicSolution work = compute_geodesic(chain, a, b, geodesic_options(c, c.steps, c.tol_geodesic));
  std::vector<std::string> pre;
  if (!fine.converged) pre.push_back("fine reference geodesic did not converge");
  if (!work.converged) pre.push_back("working geodesic did not converge");

  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    const double t = c.ts[k];
    const std::string par = fmt_param("t", t);
    double m_fine = fine.curve.density_at(t)[1] * pi[1];
    double m_cp = work.curve.density_at(t)[1] * pi[1];
    BarycenterProblem bp = base_problem(c);
    bp.references = {a, b};
    bp.lambda = Eigen::Vector2d(1.0 - t, t);
    bp.threads = 1;
    // Diracs sit on the boundary where the step has no mobility, so
    // interior weights start from the uniform measure.
    if (t > 0.0 && t < 1.0) {
      bp.init = InitKind::explicit_measure;
      bp.init_measure = Measure::from_probability(chain, Eigen::Vector2d(0.5, 0.5));
    }
    SynthesisResult s = synthesize(chain, bp);
    double m_bary = s.barycenter.density()[1] * pi[1];
    out.records = {{k, "mass_fine", m_fine, par},
                   {k, "mass_cp", m_cp, par},
                   {k, "mass_bary", m_bary, par},
                   {k, "deviation_cp", std::abs(m_cp - m_fine), par},
                   {k, "deviation_bary", std::abs(m_bary - m_fine), par}};
    out.warnings = take_warnings(s);
    return out;
  });
  r.warnings.insert(r.warnings.begin(), pre.begin(), pre.end());
  finish(r, c,
         {{"fine_iterations", fine.iterations},
          {"fine_converged", fine.converged},
          {"fine_action", fine.action},
          {"working_action", work.action}});
  return r;
}

ExperimentResult exp_geodesic_consistency(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  MarkovChain chain = build_markov_chain(g);
  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    Rng rng = trial_rng(c.seed, c.fixed_pair ? 0 : k);
    Measure a = random_measure(chain, rng);
    Measure b = random_measure(chain, rng);
    double t = c.fixed_pair ? (k + 1.0) / (c.trials + 1.0) : trial_rng(c.seed ^ 0x7417ULL, k).uniform();
    GeodesicSolution geo = compute_geodesic(chain, a, b, geodesic_options(c, c.steps, c.tol_geodesic));
    if (!geo.converged) out.warnings.push_back("geodesic did not converge");
    Eigen::VectorXd target = geo.curve.density_at(t);

    BarycenterProblem bp = base_problem(c);
    bp.references = {a, b};
    bp.threads = 1;
    bp.lambda = Eigen::Vector2d(1.0 - t, t);
    SynthesisResult s = synthesize(chain, bp);
    out.records.push_back(
        {k, "relative_error", relative_pi_error(s.barycenter.density(), target, chain), fmt_param("t", t)});
    for (auto& w : s.trace.warnings) out.warnings.push_back(w);

    for (int end = 0; end < 2; ++end) {
      bp.lambda = end == 0 ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
      SynthesisResult se = synthesize(chain, bp);
      const Eigen::VectorXd& ref = (end == 0 ? a : b).density();
      out.records.push_back({k, end == 0 ? "endpoint_error_0" : "endpoint_error_1",
                             relative_pi_error(se.barycenter.density(), ref, chain), ""});
    }
    return out;
  });
  std::vector<double> errs;
  for (const auto& rec : r.records)
    if (rec.metric == "relative_error") errs.push_back(rec.value);
  finish(r, c, {{"median_relative_error", errs.empty() ? NAN : median(errs)}});
  return r;
}

ExperimentResult exp_static_dynamic_comparison(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  MarkovChain chain = build_markov_chain(g);
  const int n = g.num_nodes;
  Eigen::VectorXd lambda;
  if (c.lambda.empty()) {
    Rng rng = trial_rng(c.seed ^ 0x1a3bULL, 0);
    lambda = random_weights(c.references, rng);
  } else {
    lambda = Eigen::Map<const Eigen::VectorXd>(c.lambda.data(), c.lambda.size());
  }
  const int p = static_cast<int>(lambda.size());
  const int t_diff = c.diffusion_t > 0 ? c.diffusion_t : graph_diameter(g);
  const Eigen::MatrixXd C_sp = cost_shortest_path_sq(g);
  const Eigen::MatrixXd C_diff = cost_diffusion_sq(chain, t_diff);
  std::vector<std::vector<std::pair<std::string, Eigen::VectorXd>>> shown(c.trials);

  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    Rng rng = trial_rng(c.seed, k);
    std::vector<int> centers;
    while (static_cast<int>(centers.size()) < p) {
      int v = rng.below(n);
      if (std::find(centers.begin(), centers.end(), v) == centers.end()) centers.push_back(v);
    }
    std::vector<Measure> refs;
    std::vector<Eigen::VectorXd> refs_p;
    for (int v : centers) {
      refs.push_back(concentrated_measure(g, chain, v, c.concentration));
      refs_p.push_back(refs.back().probability(chain));
    }

    BarycenterProblem bp = base_problem(c);
    bp.references = refs;
    bp.lambda = lambda;
    bp.threads = 1;
    SynthesisResult s = synthesize(chain, bp);
    for (auto& w : s.trace.warnings) out.warnings.push_back("dynamic: " + w);
    Eigen::VectorXd dyn = s.barycenter.probability(chain);
    AnalysisResult an = analyze(chain, s.barycenter, refs, bp.geodesic);
    out.records.push_back({k, "recovery_dyn", (an.lambda - lambda).norm() / lambda.norm(), ""});

    for (size_t i = 0; i < refs_p.size(); ++i) shown[k].push_back({"reference_" + std::to_string(i), refs_p[i]});
    shown[k].push_back({"dynamic", dyn});
    for (size_t f = 0; f < c.eps_reg_factors.size(); ++f) {
      const double fac = c.eps_reg_factors[f];
      const std::string par = fmt_param("eps_factor", fac);
      Eigen::VectorXd st[2];
      const Eigen::MatrixXd* costs[2] = {&C_sp, &C_diff};
      const char* tags[2] = {"sp", "diff"};
      for (int q = 0; q < 2; ++q) {
        const double eps_reg = fac * costs[q]->maxCoeff();
        BregmanResult br = bregman_barycenter(refs_p, lambda, *costs[q], eps_reg);
        if (!br.converged) out.warnings.push_back(std::string("bregman ") + tags[q] + " hit the iteration cap");
        st[q] = br.barycenter;
        RegressionOptions ro;
        ro.eps = eps_reg;
        ro.unroll = c.unroll;
        RegressionResult rr = entropic_coordinate_regression(st[q], refs_p, *costs[q], ro);
        out.records.push_back({k, std::string("recovery_st_") + tags[q],
                               (rr.lambda - lambda).norm() / lambda.norm(), par});
        if (f == c.eps_reg_factors.size() / 2) shown[k].push_back({std::string("static_") + tags[q], st[q]});
      }
      out.records.push_back({k, "l1_dyn_st_sp", (dyn - st[0]).lpNorm<1>(), par});
      out.records.push_back({k, "l1_dyn_st_diff", (dyn - st[1]).lpNorm<1>(), par});
      out.records.push_back({k, "l1_st_sp_st_diff", (st[0] - st[1]).lpNorm<1>(), par});
    }
    return out;
  });
  r.measures = shown[0];
  finish(r, c, {{"diffusion_t", t_diff}, {"lambda", std::vector<double>(lambda.data(), lambda.data() + p)}});
  return r;
}

ExperimentResult exp_initialization(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  MarkovChain chain = build_markov_chain(g);
  std::vector<std::vector<Eigen::VectorXd>> bary(c.trials);
  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    Rng rng = trial_rng(c.seed, k);
    std::vector<Measure> refs;
    for (int i = 0; i < c.references; ++i) refs.push_back(random_measure(chain, rng));
    BarycenterProblem bp = base_problem(c);
    bp.references = refs;
    bp.lambda = random_weights(c.references, rng);
    bp.threads = 1;
    bp.init = InitKind::explicit_measure;
    std::vector<Eigen::VectorXd> results;
    for (int i = 0; i < c.references; ++i) {
      bp.init_measure = refs[i];
      SynthesisResult s = synthesize(chain, bp);
      results.push_back(s.barycenter.density());
      for (auto& w : s.trace.warnings) out.warnings.push_back("init " + std::to_string(i) + ": " + w);
    }
    double worst = 0.0;
    for (int i = 0; i < c.references; ++i)
      for (int j = i + 1; j < c.references; ++j) {
        double d = pi_norm(results[i] - results[j], chain);
        worst = std::max(worst, d);
        out.records.push_back({k, "pairwise_difference", d,
                               "i=" + std::to_string(i) + ";j=" + std::to_string(j)});
      }
    out.records.push_back({k, "max_pairwise_difference", worst, ""});
    bary[k] = results;
    return out;
  });
  if (!bary[0].empty()) {
    for (size_t i = 0; i < bary[0].size(); ++i) {
      r.measures.push_back({"init_" + std::to_string(i), bary[0][i].cwiseProduct(chain.pi())});
    }
  }
  finish(r, c);
  return r;
}

ExperimentResult exp_coordinate_recovery(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  MarkovChain chain = build_markov_chain(g);
  auto recover = [&](const std::vector<Measure>& refs, const Eigen::VectorXd& lambda,
                     BarycenterProblem bp, std::vector<std::string>& warnings) {
    bp.references = refs;
    bp.lambda = lambda;
    bp.threads = 1;
    SynthesisResult s = synthesize(chain, bp);
    for (auto& w : s.trace.warnings) warnings.push_back(w);
    AnalysisResult an = analyze(chain, s.barycenter, refs, bp.geodesic);
    return (an.lambda - lambda).norm() / lambda.norm();
  };
  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    Rng rng = trial_rng(c.seed, k);
    std::vector<Measure> refs;
    for (int i = 0; i < c.references; ++i) refs.push_back(random_measure(chain, rng));
    Eigen::VectorXd lambda = random_weights(c.references, rng);
    out.records.push_back(
        {k, "relative_coordinate_error", recover(refs, lambda, base_problem(c), out.warnings), ""});
    return out;
  });

  json extra = json::object();
  if (c.sweep) {
    Rng rng = trial_rng(c.seed ^ 0x5eedULL, 0);
    std::vector<Measure> refs;
    for (int i = 0; i < c.references; ++i) refs.push_back(random_measure(chain, rng));
    Eigen::VectorXd lambda = random_weights(c.references, rng);
    struct Cell {
      double tol;
      int steps;
    };
    std::vector<Cell> cells;
    for (double tol : c.sweep_tol_geodesic)
      for (int st : c.sweep_steps) cells.push_back({tol, st});
    std::vector<double> errs(cells.size(), NAN);
    std::vector<std::vector<std::string>> warns(cells.size());
    parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
      BarycenterProblem bp = base_problem(c);
      bp.eps = c.sweep_eps;
      bp.tol = c.sweep_tol_bary;
      bp.geodesic = geodesic_options(c, cells[i].steps, cells[i].tol);
      try {
        errs[i] = recover(refs, lambda, bp, warns[i]);
      } catch (const DomainError& e) {
        warns[i].push_back(e.what());
      }
    });
    json matrix = json::array();
    for (size_t i = 0; i < cells.size(); ++i) {
      std::string par = fmt_param("tol_geodesic", cells[i].tol) + ";" + fmt_param("steps", cells[i].steps);
      if (std::isfinite(errs[i])) r.records.push_back({c.trials + static_cast<int>(i), "sweep_error", errs[i], par});
      else r.records.push_back({c.trials + static_cast<int>(i), "failed", 1.0, par});
      for (auto& w : warns[i]) r.warnings.push_back("sweep " + par + ": " + w);
      matrix.push_back({{"tol_geodesic", cells[i].tol}, {"steps", cells[i].steps},
                        {"error", std::isfinite(errs[i]) ? json(errs[i]) : json(nullptr)}});
    }
    extra["sweep"] = matrix;
  }
  std::vector<double> errs;
  for (const auto& rec : r.records)
    if (rec.metric == "relative_coordinate_error") errs.push_back(rec.value);
  if (!errs.empty()) {
    auto frac_below = [&](double th) {
      return static_cast<double>(std::count_if(errs.begin(), errs.end(), [&](double e) { return e < th; })) /
             errs.size();
    };
    extra["fraction_below_0.01"] = frac_below(0.01);
    extra["fraction_below_0.05"] = frac_below(0.05);
  }
  finish(r, c, extra);
  return r;
}

ExperimentResult exp_convergence(const ExperimentConfig& c) {
  Graph g = make_graph(c.graph);
  MarkovChain chain = build_markov_chain(g);
  auto r = run_trials(c, g, [&](int k) {
    TrialOut out;
    Rng rng = trial_rng(c.seed, k);
    std::vector<Measure> refs;
    for (int i = 0; i < c.references; ++i) refs.push_back(random_measure(chain, rng));
    BarycenterProblem bp = base_problem(c);
    bp.references = refs;
    bp.lambda = random_weights(c.references, rng);
    bp.threads = 1;
    SynthesisResult s = synthesize(chain, bp);
    out.warnings = s.trace.warnings;
    for (const auto& st : s.trace.steps) out.trace.push_back(st.step_norm);
    out.records.push_back({k, "outer_steps", static_cast<double>(out.trace.size()), ""});
    out.records.push_back({k, "final_step_norm", out.trace.empty() ? 0.0 : out.trace.back(), ""});
    if (out.trace.size() >= 2) {
      LinearFit fit = trailing_log_fit(out.trace);
      // exp(slope) < 1 is linear convergence; kept as a nonnegative value
      out.records.push_back({k, "contraction_factor", std::exp(fit.slope), ""});
      out.records.push_back({k, "r2", fit.r2, ""});
    }
    return out;
  });
  int good = 0, fitted = 0;
  for (size_t i = 0; i + 1 < r.records.size(); ++i) {
    if (r.records[i].metric == "contraction_factor") {
      ++fitted;
      if (r.records[i].value < 1.0 && r.records[i + 1].value >= 0.9) ++good;
    }
  }
  finish(r, c, {{"fitted_trials", fitted},
                {"fraction_linear", fitted ? static_cast<double>(good) / c.trials : 0.0}});
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.name == "two_point") return exp_two_point(cfg);
  if (cfg.name == "geodesic_consistency") return exp_geodesic_consistency(cfg);
  if (cfg.name == "static_dynamic") return exp_static_dynamic_comparison(cfg);
  if (cfg.name == "initialization") return exp_initialization(cfg);
  if (cfg.name == "coordinate_recovery") return exp_coordinate_recovery(cfg);
  if (cfg.name == "convergence") return exp_convergence(cfg);
  throw DomainError("unknown experiment '" + cfg.name + "'");
}

}  // namespace gbcm
