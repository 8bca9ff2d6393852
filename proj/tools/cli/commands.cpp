#include "cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "cli/manifest.hpp"
#include "cli/svg.hpp"
#include "gbcm/barycenter.hpp"
#include "gbcm/error.hpp"
#include "gbcm/experiments.hpp"
#include "gbcm/geodesic.hpp"
#include "gbcm/io.hpp"
#include "gbcm/parallel.hpp"
#include "gbcm/static_ot.hpp"
#include "gbcm/version.hpp"

namespace gbcm::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out;
  bool quiet = false;
};

struct GeoFlags {
  int steps = 10;
  double tol = 1e-10;
  std::string mean = "geometric";
  int max_iters = 200000;

  GeodesicOptions options() const {
    GeodesicOptions o;
    o.steps = steps;
    o.tol = tol;
    o.mean = AdmissibleMean::parse(mean);
    o.max_iters = max_iters;
    return o;
  }
  json to_json() const { return {{"steps", steps}, {"tol_geodesic", tol}, {"mean", mean}, {"max_iters", max_iters}}; }
};

void add_geo_flags(CLI::App* sub, GeoFlags& g) {
  sub->add_option("--steps", g.steps, "time steps N")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--tol-geodesic", g.tol, "geodesic stopping threshold delta_g")->capture_default_str();
  sub->add_option("--mean", g.mean, "admissible mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"geometric", "logarithmic"}));
  sub->add_option("--max-iters", g.max_iters, "Chambolle-Pock iteration cap")->capture_default_str();
}

std::string repr(double x) {
  std::string s = format_double(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

struct Context {
  Globals g;
  std::ostream& out;
  std::ostream& err;
  RunManifest manifest;

  void warn(const std::string& msg) const {
    if (!g.quiet) err << "warning: " << msg << "\n";
  }
  void warn_all(const std::vector<std::string>& msgs) const {
    for (const auto& m : msgs) warn(m);
  }
  int threads() const { return g.threads > 0 ? g.threads : default_thread_count(); }
  const std::string& require_out(const char* what) const {
    if (g.out.empty()) throw CLI::RequiredError(std::string("--out (") + what + ")");
    return g.out;
  }
  void write_manifest(const std::string& path) {
    manifest.finished = utc_timestamp();
    write_file(path, manifest.to_json().dump(1) + "\n");
  }
};

Graph load_graph(Context& c, const std::string& path) {
  c.manifest.add_input(path);
  return read_graph(path);
}

Measure load_measure(Context& c, const MarkovChain& chain, const std::string& path) {
  c.manifest.add_input(path);
  Eigen::VectorXd p = read_probability_csv(path);
  if (p.size() != chain.num_nodes()) {
    throw DomainError(path + ": has " + std::to_string(p.size()) + " entries, graph has " +
                      std::to_string(chain.num_nodes()) + " nodes");
  }
  return Measure::from_probability(chain, p);
}

std::vector<Measure> load_measures(Context& c, const MarkovChain& chain, const std::vector<std::string>& paths) {
  std::vector<Measure> out;
  for (const auto& p : paths) out.push_back(load_measure(c, chain, p));
  return out;
}

Eigen::VectorXd load_probability(Context& c, const std::string& path) {
  c.manifest.add_input(path);
  return read_probability_csv(path);
}

Eigen::MatrixXd static_cost(const Graph& g, const std::string& kind, int t) {
  if (kind == "shortest-path") return cost_shortest_path_sq(g);
  MarkovChain chain = build_markov_chain(g);
  return cost_diffusion_sq(chain, t > 0 ? t : graph_diameter(g));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barycentric coding of measures on graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  Context ctx{Globals{}, out, err, RunManifest{}};
  Globals& G = ctx.g;
  app.add_option("--seed", G.seed, "random seed (experiments)")->each([&](const std::string&) { G.seed_set = true; });
  app.add_option("--threads", G.threads, "worker threads (default: GBCM_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--out", G.out, "output file or directory");
  app.add_flag("--quiet", G.quiet, "suppress warnings");

  // validate
  auto* v = app.add_subcommand("validate", "check a graph (and optional measures)");
  std::string v_graph;
  std::vector<std::string> v_measures;
  v->add_option("--graph", v_graph, "graph JSON")->required();
  v->add_option("--measure", v_measures, "probability CSV files");

  // distance / geodesic
  auto* d = app.add_subcommand("distance", "discretized transport distance W_h");
  auto* geo = app.add_subcommand("geodesic", "geodesic between two measures (JSON dump)");
  std::string d_graph, d_a, d_b;
  GeoFlags d_geo;
  for (auto* s : {d, geo}) {
    s->add_option("--graph", d_graph, "graph JSON")->required();
    s->add_option("--a", d_a, "start probability CSV")->required();
    s->add_option("--b", d_b, "end probability CSV")->required();
    add_geo_flags(s, d_geo);
  }

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "barycenter by intrinsic gradient descent");
  std::string s_graph, s_weights, s_trace, s_init = "best";
  std::vector<std::string> s_refs;
  double s_eps = 0.25, s_tol = 1e-10;
  int s_max_outer = 10000;
  GeoFlags s_geo;
  syn->add_option("--graph", s_graph, "graph JSON")->required();
  syn->add_option("--refs", s_refs, "reference probability CSVs")->required();
  syn->add_option("--weights", s_weights, "comma separated weights on the simplex")->required();
  syn->add_option("--eps", s_eps, "descent step eps")->capture_default_str();
  syn->add_option("--tol-bary", s_tol, "descent threshold delta_b")->capture_default_str();
  syn->add_option("--max-outer", s_max_outer, "descent iteration cap")->capture_default_str();
  syn->add_option("--init", s_init, "best, first, or a probability CSV")->capture_default_str();
  syn->add_option("--trace", s_trace, "per-iteration CSV");
  add_geo_flags(syn, s_geo);

  // analyze
  auto* an = app.add_subcommand("analyze", "barycentric coordinates by the simplex QP");
  std::string a_graph, a_target;
  std::vector<std::string> a_refs;
  GeoFlags a_geo;
  an->add_option("--graph", a_graph, "graph JSON")->required();
  an->add_option("--target", a_target, "probability CSV")->required();
  an->add_option("--refs", a_refs, "reference probability CSVs")->required();
  add_geo_flags(an, a_geo);

  // sinkhorn-bary
  auto* sb = app.add_subcommand("sinkhorn-bary", "entropic barycenter by Bregman projections");
  std::string sb_graph, sb_cost = "shortest-path", sb_weights;
  std::vector<std::string> sb_refs;
  int sb_t = 0;
  double sb_eps = 0.01, sb_tol = 1e-10;
  sb->add_option("--graph", sb_graph, "graph JSON")->required();
  sb->add_option("--cost", sb_cost, "ground cost")->capture_default_str()->check(CLI::IsMember({"shortest-path", "diffusion"}));
  sb->add_option("--t", sb_t, "diffusion time (0: graph diameter)")->capture_default_str();
  sb->add_option("--epsilon", sb_eps, "entropic regularization (absolute)")->capture_default_str();
  sb->add_option("--tol", sb_tol, "L1 change threshold")->capture_default_str();
  sb->add_option("--refs", sb_refs, "reference probability CSVs")->required();
  sb->add_option("--weights", sb_weights, "comma separated weights")->required();

  // entropic-analyze
  auto* ea = app.add_subcommand("entropic-analyze", "coordinates by unrolled Bregman regression");
  std::string ea_graph, ea_cost = "shortest-path", ea_target;
  std::vector<std::string> ea_refs;
  int ea_t = 0;
  RegressionOptions ea_opt;
  ea->add_option("--graph", ea_graph, "graph JSON")->required();
  ea->add_option("--cost", ea_cost, "ground cost")->capture_default_str()->check(CLI::IsMember({"shortest-path", "diffusion"}));
  ea->add_option("--t", ea_t, "diffusion time (0: graph diameter)")->capture_default_str();
  ea->add_option("--epsilon", ea_opt.eps, "entropic regularization (absolute)")->capture_default_str();
  ea->add_option("--target", ea_target, "probability CSV")->required();
  ea->add_option("--refs", ea_refs, "reference probability CSVs")->required();
  ea->add_option("--unroll", ea_opt.unroll, "unrolled iterations L")->capture_default_str()->check(CLI::PositiveNumber);
  ea->add_option("--lr", ea_opt.lr, "initial learning rate")->capture_default_str();
  ea->add_option("--iters", ea_opt.iters, "gradient steps")->capture_default_str();

  // experiment
  auto* ex = app.add_subcommand("experiment", "run an experiment driver");
  std::string ex_name, ex_config;
  bool ex_plots = false;
  ex->add_option("name", ex_name, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
  ex->add_option("--config", ex_config, "JSON overrides");
  ex->add_flag("--plots", ex_plots, "also write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string cmd;
  for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);
  ctx.manifest.command = cmd;
  ctx.manifest.started = utc_timestamp();
  ctx.manifest.seed = G.seed;
  ctx.manifest.parameters["threads"] = ctx.threads();

  try {
    if (v->parsed()) {
      Graph g = load_graph(ctx, v_graph);
      MarkovChain chain = build_markov_chain(g);
      const auto& Q = chain.Q();
      const auto& pi = chain.pi();
      double db = 0.0;
      for (int x = 0; x < chain.num_nodes(); ++x)
        for (int y = 0; y < chain.num_nodes(); ++y) db = std::max(db, std::abs(pi[x] * Q(x, y) - pi[y] * Q(y, x)));
      out << "nodes: " << g.num_nodes << "\n"
          << "edges: " << g.num_edges() << "\n"
          << "connected: yes\n"
          << "detailed_balance_residual: " << format_double(db) << "\n";
      for (const auto& m : v_measures) {
        load_measure(ctx, chain, m);
        out << "measure " << m << ": ok\n";
      }
      return 0;
    }

    if (d->parsed() || geo->parsed()) {
      Graph g = load_graph(ctx, d_graph);
      MarkovChain chain = build_markov_chain(g);
      Measure a = load_measure(ctx, chain, d_a), b = load_measure(ctx, chain, d_b);
      GeodesicSolution sol = compute_geodesic(chain, a, b, d_geo.options());
      ctx.warn_all(sol.warnings);
      if (!sol.converged) ctx.warn("geodesic did not reach the stopping threshold");
      if (d->parsed()) {
        out << repr(sol.distance()) << "\n";
        return 0;
      }
      const std::string& path = ctx.require_out("geodesic JSON");
      ctx.manifest.parameters.update(d_geo.to_json());
      write_file(path, geodesic_to_json(sol, chain));
      ctx.write_manifest(path + ".manifest.json");
      return 0;
    }

    if (syn->parsed()) {
      const std::string& path = ctx.require_out("barycenter CSV");
      Graph g = load_graph(ctx, s_graph);
      MarkovChain chain = build_markov_chain(g);
      BarycenterProblem bp;
      bp.references = load_measures(ctx, chain, s_refs);
      bp.lambda = parse_weights(s_weights);
      bp.eps = s_eps;
      bp.tol = s_tol;
      bp.max_outer = s_max_outer;
      bp.geodesic = s_geo.options();
      bp.threads = ctx.threads();
      if (s_init == "best") bp.init = InitKind::best_reference;
      else if (s_init == "first") bp.init = InitKind::first_reference;
      else {
        bp.init = InitKind::explicit_measure;
        bp.init_measure = load_measure(ctx, chain, s_init);
      }
      SynthesisResult r = synthesize(chain, bp);
      ctx.warn_all(r.trace.warnings);
      write_file(path, vector_to_csv(r.barycenter.probability(chain)));
      if (!s_trace.empty()) {
        std::string t = "iteration,step_norm,objective,halvings,eps_used\n";
        for (size_t k = 0; k < r.trace.steps.size(); ++k) {
          const auto& st = r.trace.steps[k];
          t += std::to_string(k) + "," + format_double(st.step_norm) + "," + format_double(st.objective) + "," +
               std::to_string(st.halvings) + "," + format_double(st.eps_used) + "\n";
        }
        write_file(s_trace, t);
      }
      ctx.manifest.parameters.update(s_geo.to_json());
      ctx.manifest.parameters.update(json{{"weights", s_weights}, {"eps", s_eps}, {"tol_bary", s_tol},
                                          {"max_outer", s_max_outer}, {"init", s_init},
                                          {"converged", r.trace.converged},
                                          {"outer_steps", r.trace.steps.size()}});
      ctx.write_manifest(path + ".manifest.json");
      if (!G.quiet) out << "outer steps: " << r.trace.steps.size() << (r.trace.converged ? " (converged)" : " (not converged)") << "\n";
      return 0;
    }

    if (an->parsed()) {
      const std::string& path = ctx.require_out("coords JSON");
      Graph g = load_graph(ctx, a_graph);
      MarkovChain chain = build_markov_chain(g);
      Measure target = load_measure(ctx, chain, a_target);
      std::vector<Measure> refs = load_measures(ctx, chain, a_refs);
      AnalysisResult r = analyze(chain, target, refs, a_geo.options(), ctx.threads());
      if (!r.qp_converged) ctx.warn("simplex QP hit its iteration cap");
      write_file(path, coords_to_json(r.lambda, r.value, r.gram));
      ctx.manifest.parameters.update(a_geo.to_json());
      ctx.write_manifest(path + ".manifest.json");
      return 0;
    }

    if (sb->parsed()) {
      const std::string& path = ctx.require_out("barycenter CSV");
      Graph g = load_graph(ctx, sb_graph);
      std::vector<Eigen::VectorXd> refs;
      for (const auto& r : sb_refs) refs.push_back(load_probability(ctx, r));
      for (const auto& r : refs)
        if (r.size() != g.num_nodes) throw DomainError("sinkhorn-bary: reference size differs from graph");
      Eigen::VectorXd lambda = parse_weights(sb_weights);
      Eigen::MatrixXd C = static_cost(g, sb_cost, sb_t);
      BregmanResult r = bregman_barycenter(refs, lambda, C, sb_eps, sb_tol);
      if (!r.converged) ctx.warn("Bregman iterations hit the cap");
      write_file(path, vector_to_csv(r.barycenter));
      ctx.manifest.parameters.update(json{{"cost", sb_cost}, {"t", sb_t}, {"epsilon", sb_eps}, {"tol", sb_tol},
                                          {"weights", sb_weights}, {"iterations", r.iterations}});
      ctx.write_manifest(path + ".manifest.json");
      return 0;
    }

    if (ea->parsed()) {
      const std::string& path = ctx.require_out("coords JSON");
      Graph g = load_graph(ctx, ea_graph);
      Eigen::VectorXd target = load_probability(ctx, ea_target);
      std::vector<Eigen::VectorXd> refs;
      for (const auto& r : ea_refs) refs.push_back(load_probability(ctx, r));
      if (target.size() != g.num_nodes) throw DomainError("entropic-analyze: target size differs from graph");
      Eigen::MatrixXd C = static_cost(g, ea_cost, ea_t);
      RegressionResult r = entropic_coordinate_regression(target, refs, C, ea_opt);
      json j;
      j["lambda"] = std::vector<double>(r.lambda.data(), r.lambda.data() + r.lambda.size());
      j["loss"] = r.loss;
      j["initial_loss"] = r.initial_loss;
      j["iterations"] = r.iterations;
      write_file(path, j.dump(1) + "\n");
      ctx.manifest.parameters.update(json{{"cost", ea_cost}, {"t", ea_t}, {"epsilon", ea_opt.eps},
                                          {"unroll", ea_opt.unroll}, {"lr", ea_opt.lr}, {"iters", ea_opt.iters}});
      ctx.write_manifest(path + ".manifest.json");
      return 0;
    }

    if (ex->parsed()) {
      const std::string& dir = ctx.require_out("experiment directory");
      ExperimentConfig cfg = default_config(ex_name);
      if (!ex_config.empty()) {
        ctx.manifest.add_input(ex_config);
        cfg = parse_experiment_config(ex_name, read_file(ex_config));
      }
      if (G.seed_set) cfg.seed = G.seed;
      if (G.threads > 0) cfg.threads = G.threads;
      else if (cfg.threads == 1) cfg.threads = default_thread_count();
      std::filesystem::create_directories(dir);
      ExperimentResult r = run_experiment(cfg);
      ctx.warn_all(r.warnings);
      namespace fs = std::filesystem;
      write_file((fs::path(dir) / "records.csv").string(), records_to_csv(r.records));
      write_file((fs::path(dir) / "summary.json").string(), r.summary_json);
      write_file((fs::path(dir) / "config.json").string(), config_to_json(cfg));
      if (ex_plots) {
        std::vector<std::string> notices;
        auto files = emit_plots(r, dir, notices);
        for (const auto& n : notices)
          if (!G.quiet) err << "notice: " << n << "\n";
        ctx.manifest.parameters["plots"] = files;
      }
      ctx.manifest.seed = cfg.seed;
      ctx.manifest.parameters["experiment"] = json::parse(config_to_json(cfg));
      ctx.write_manifest((fs::path(dir) / "manifest.json").string());
      if (!G.quiet) out << "wrote " << r.records.size() << " records to " << dir << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gbcm::cli
