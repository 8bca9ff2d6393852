#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "cli/svg.hpp"
#include "gbcm/experiments.hpp"
#include "gbcm/io.hpp"

namespace fs = std::filesystem;
using namespace gbcm;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gbcm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("gbcm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    graph = path("g.json");
    g = grid_graph(3, 3);
    write_file(graph, graph_to_json(g));
    MarkovChain c = build_markov_chain(g);
    Rng rng(9);
    for (int i = 0; i < 3; ++i) {
      refs.push_back(path("r" + std::to_string(i) + ".csv"));
      write_file(refs.back(), vector_to_csv(random_measure(c, rng).probability(c)));
    }
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
  std::string graph;
  Graph g;
  std::vector<std::string> refs;
};

}  // namespace

TEST_F(CliTest, ValidateReportsGraph) {
  CliRun r = invoke({"validate", "--graph", graph, "--measure", refs[0]});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("nodes: 9"), std::string::npos);
  EXPECT_NE(r.out.find("edges: 12"), std::string::npos);
  EXPECT_NE(r.out.find("connected: yes"), std::string::npos);
}

TEST_F(CliTest, DisconnectedGraphIsADomainError) {
  write_file(path("bad.json"), R"({"nodes":[{"id":0},{"id":1},{"id":2}],"edges":[{"u":0,"v":1}]})");
  CliRun r = invoke({"validate", "--graph", path("bad.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("connected"), std::string::npos);
}

TEST_F(CliTest, DistanceOfIdenticalMeasuresIsZero) {
  CliRun r = invoke({"distance", "--graph", graph, "--a", refs[0], "--b", refs[0]});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.0\n");
  CliRun s = invoke({"distance", "--graph", graph, "--a", refs[0], "--b", refs[1], "--steps", "6"});
  EXPECT_EQ(s.code, 0) << s.err;
  EXPECT_GT(std::stod(s.out), 0.0);
}

TEST_F(CliTest, AnalyzeRecoversAReference) {
  CliRun r = invoke({"--out", path("coords.json"), "analyze", "--graph", graph, "--target", refs[1], "--refs", refs[0],
               refs[1], refs[2], "--steps", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(read_file(path("coords.json")));
  EXPECT_NEAR(j["lambda"][1].get<double>(), 1.0, 1e-6);
  EXPECT_TRUE(fs::exists(path("coords.json.manifest.json")));
}

TEST_F(CliTest, SynthesizeWritesBarycenterAndManifest) {
  CliRun r = invoke({"--out", path("bary.csv"), "synthesize", "--graph", graph, "--refs", refs[0], refs[1], refs[2],
               "--weights", "0.4,0.3,0.3", "--steps", "6", "--tol-bary", "1e-6", "--trace", path("trace.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  Eigen::VectorXd p = read_probability_csv(path("bary.csv"));
  EXPECT_EQ(p.size(), 9);
  auto m = nlohmann::json::parse(read_file(path("bary.csv.manifest.json")));
  EXPECT_EQ(m["inputs"].size(), 4u);
  EXPECT_EQ(m["library_version"], "0.1.0");
  EXPECT_EQ(read_file(path("trace.csv")).rfind("iteration,step_norm", 0), 0u);
}

TEST_F(CliTest, ExitCodes) {
  write_file(path("bad.csv"), "0.5\nnope\n");
  EXPECT_EQ(invoke({"distance", "--graph", graph, "--a", path("bad.csv"), "--b", refs[0]}).code, 1);
  EXPECT_EQ(invoke({"--out", path("x.csv"), "synthesize", "--graph", graph, "--refs", refs[0], refs[1], "--weights",
                 "0.2,0.3,0.5"}).code,
            1);
  EXPECT_EQ(invoke({"distance", "--graph", graph}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"experiment", "nope"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, ExperimentIsReproducible) {
  write_file(path("cfg.json"), R"({"trials":3,"graph":"grid:3x3"})");
  auto run = [&](const std::string& out, const std::string& seed) {
    return invoke({"--out", path(out), "--seed", seed, "experiment", "coordinate_recovery", "--config", path("cfg.json"),
                "--plots"});
  };
  ASSERT_EQ(run("a", "3").code, 0);
  ASSERT_EQ(run("b", "3").code, 0);
  ASSERT_EQ(run("c", "4").code, 0);
  std::string a = read_file(path("a/records.csv"));
  EXPECT_EQ(a, read_file(path("b/records.csv")));
  EXPECT_NE(a, read_file(path("c/records.csv")));
  for (const char* f : {"summary.json", "config.json", "manifest.json"}) EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  EXPECT_EQ(read_file(path("a/hist_relative_coordinate_error.svg")),
            read_file(path("b/hist_relative_coordinate_error.svg")));
  auto m = nlohmann::json::parse(read_file(path("a/manifest.json")));
  EXPECT_EQ(m["seed"], 3);
}

TEST(Manifest, DigestTracksInputBytes) {
  auto p = (fs::temp_directory_path() / "gbcm_manifest_input.txt").string();
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_file(p, "0.5\n0.5\n");
  cli::RunManifest a;
  a.add_input(p);
  cli::RunManifest b;
  b.add_input(p);
  write_file(p, "0.5\n0.50\n");
  cli::RunManifest c;
  c.add_input(p);
  EXPECT_EQ(a.inputs[0].sha256, b.inputs[0].sha256);
  EXPECT_NE(a.inputs[0].sha256, c.inputs[0].sha256);
  fs::remove(p);
}

namespace {
size_t count(const std::string& s, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}
}  // namespace

TEST(Svg, HistogramBinsAndDeterminism) {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(std::sin(i));
  EXPECT_EQ(cli::default_bin_count(30), 6);
  EXPECT_EQ(cli::default_bin_count(1), 1);
  std::string a = cli::svg_histogram(v, "x");
  EXPECT_EQ(a, cli::svg_histogram(v, "x"));
  // background plus one bar per bin
  EXPECT_EQ(count(a, "<rect"), 1u + 6u);
  std::string empty = cli::svg_histogram({}, "x");
  EXPECT_EQ(count(empty, "<rect"), 1u);
  EXPECT_NE(empty.find("<line"), std::string::npos);
}

TEST(Svg, MeasureRadiusIsMonotone) {
  Graph g = grid_graph(2, 2);
  Eigen::Vector4d p(0.1, 0.2, 0.3, 0.4);
  auto s = cli::svg_measure(g, p, "m");
  ASSERT_TRUE(s.has_value());
  std::regex re("<circle[^>]* r=\"([0-9.]+)\"");
  std::vector<double> r;
  for (auto it = std::sregex_iterator(s->begin(), s->end(), re); it != std::sregex_iterator(); ++it)
    r.push_back(std::stod((*it)[1]));
  ASSERT_EQ(r.size(), 4u);
  for (int i = 1; i < 4; ++i) EXPECT_GT(r[i], r[i - 1]);
  Graph bare;
  bare.num_nodes = 4;
  EXPECT_FALSE(cli::svg_measure(bare, p, "m").has_value());
}
