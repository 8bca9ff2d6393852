#include "gbcm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gbcm/error.hpp"

namespace gbcm {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write file " + path);
  out << contents;
  if (!out) throw DomainError("write failed for " + path);
}

Graph parse_graph_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("graph json: malformed: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array() || !j.contains("edges") ||
      !j["edges"].is_array()) {
    throw DomainError("graph json: expected object with \"nodes\" and \"edges\" arrays");
  }
  Graph g;
  g.num_nodes = static_cast<int>(j["nodes"].size());
  std::vector<std::array<double, 2>> pos(g.num_nodes, {0.0, 0.0});
  std::vector<char> seen(g.num_nodes, 0);
  bool any_pos = false;
  try {
    for (int k = 0; k < g.num_nodes; ++k) {
      const json& nd = j["nodes"][k];
      int id = nd.is_object() && nd.contains("id") ? nd["id"].get<int>() : k;
      if (id < 0 || id >= g.num_nodes || seen[id]) {
        throw DomainError("graph json: node ids must be a permutation of 0..n-1 (bad id " +
                          std::to_string(id) + ")");
      }
      seen[id] = 1;
      if (nd.is_object() && nd.contains("pos")) {
        const json& p = nd["pos"];
        if (!p.is_array() || p.size() != 2) throw DomainError("graph json: pos must be [x, y]");
        pos[id] = {p[0].get<double>(), p[1].get<double>()};
        any_pos = true;
      }
    }
    for (const json& e : j["edges"]) {
      GraphEdge ge;
      ge.u = e.at("u").get<int>();
      ge.v = e.at("v").get<int>();
      if (e.contains("w")) {
        ge.weight = e["w"].get<double>();
        g.weighted = true;
      }
      if (ge.u < 0 || ge.u >= g.num_nodes || ge.v < 0 || ge.v >= g.num_nodes) {
        throw DomainError("graph json: edge endpoint out of range");
      }
      g.edges.push_back(ge);
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("graph json: ") + e.what());
  }
  if (any_pos) g.positions = pos;
  return g;
}

Graph read_graph(const std::string& path) { return parse_graph_json(read_file(path)); }

std::string graph_to_json(const Graph& g) {
  json j;
  j["nodes"] = json::array();
  for (int i = 0; i < g.num_nodes; ++i) {
    json nd = {{"id", i}};
    if (!g.positions.empty()) nd["pos"] = {g.positions[i][0], g.positions[i][1]};
    j["nodes"].push_back(nd);
  }
  j["edges"] = json::array();
  for (const auto& e : g.edges) {
    json je = {{"u", e.u}, {"v", e.v}};
    if (g.weighted) je["w"] = e.weight;
    j["edges"].push_back(je);
  }
  return j.dump(1) + "\n";
}

Eigen::VectorXd parse_vector_csv(const std::string& text, const std::string& what) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    size_t b = line.find_last_not_of(" \t\r,");
    std::string tok = line.substr(a, b - a + 1);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw DomainError(what + ": line " + std::to_string(lineno) + " is not a number");
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw DomainError(what + ": no values");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
  return parse_vector_csv(read_file(path), path);
}

std::string vector_to_csv(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += format_double(v[i]) + "\n";
  return s;
}

void check_probability_vector(const Eigen::VectorXd& p, const std::string& what) {
  for (int i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw DomainError(what + ": non-finite entry " + std::to_string(i));
    if (p[i] < 0.0) throw DomainError(what + ": negative entry " + std::to_string(i));
  }
  if (std::abs(p.sum() - 1.0) > 1e-8) {
    throw DomainError(what + ": entries sum to " + format_double(p.sum()) + ", expected 1");
  }
}

Eigen::VectorXd read_probability_csv(const std::string& path) {
  Eigen::VectorXd p = read_vector_csv(path);
  check_probability_vector(p, path);
  return p;
}

Eigen::VectorXd parse_weights(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw DomainError("weights: bad entry '" + tok + "'");
    vals.push_back(v);
  }
  if (vals.empty()) throw DomainError("weights: empty list");
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  if (w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-10) {
    throw DomainError("weights: not on the simplex (need nonnegative entries summing to 1)");
  }
  return w;
}

std::string geodesic_to_json(const GeodesicSolution& sol, const MarkovChain& chain) {
  const auto& c = sol.curve;
  const int n = chain.num_nodes();
  json j;
  j["N"] = c.steps();
  j["mean"] = sol.mean.name();
  j["action"] = sol.action;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["rho"] = json::array();
  for (int i = 0; i < c.rho.rows(); ++i) {
    std::vector<double> row(c.rho.cols());
    for (int x = 0; x < n; ++x) row[x] = c.rho(i, x);
    j["rho"].push_back(row);
  }
  // m[i][x][y]: flux from x to y on interval i (skew; zero off the edges)
  j["m"] = json::array();
  for (int i = 0; i < c.steps(); ++i) {
    std::vector<std::vector<double>> mat(n, std::vector<double>(n, 0.0));
    for (int e = 0; e < chain.num_edges(); ++e) {
      mat[chain.tail(e)][chain.head(e)] = c.m(i, e);
      mat[chain.head(e)][chain.tail(e)] = -c.m(i, e);
    }
    j["m"].push_back(mat);
  }
  return j.dump() + "\n";
}

std::string coords_to_json(const Eigen::VectorXd& lambda, double qp_value,
                           const Eigen::MatrixXd& gram) {
  nlohmann::ordered_json j;
  j["lambda"] = std::vector<double>(lambda.data(), lambda.data() + lambda.size());
  j["qp_value"] = qp_value;
  j["gram"] = nlohmann::ordered_json::array();
  for (int i = 0; i < gram.rows(); ++i) {
    std::vector<double> row(gram.cols());
    for (int k = 0; k < gram.cols(); ++k) row[k] = gram(i, k);
    j["gram"].push_back(row);
  }
  return j.dump(1) + "\n";
}

}  // namespace gbcm
