#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbcm/geodesic.hpp"
#include "gbcm/graph.hpp"

namespace gbcm {

// Graph files are JSON:
//   {"nodes": [{"id": 0, "pos": [x, y]}, ...], "edges": [{"u": 0, "v": 1, "w": 1.0}, ...]}
// "pos" and "w" are optional. Node ids must be 0..n-1 in any order.
Graph parse_graph_json(const std::string& text);
Graph read_graph(const std::string& path);
std::string graph_to_json(const Graph& g);

// Vectors are CSV with one value per line; blank lines and lines starting
// with '#' are skipped. Values are written with 17 significant digits so a
// written file reads back bit-exactly.
Eigen::VectorXd parse_vector_csv(const std::string& text, const std::string& what);
Eigen::VectorXd read_vector_csv(const std::string& path);
std::string vector_to_csv(const Eigen::VectorXd& v);

// A probability vector: nonnegative entries summing to 1 within 1e-8.
Eigen::VectorXd read_probability_csv(const std::string& path);
void check_probability_vector(const Eigen::VectorXd& p, const std::string& what);

// "0.4,0.3,0.3" -> vector; checked to lie on the simplex within 1e-10.
Eigen::VectorXd parse_weights(const std::string& text);

std::string geodesic_to_json(const GeodesicSolution& sol, const MarkovChain& chain);
std::string coords_to_json(const Eigen::VectorXd& lambda, double qp_value,
                           const Eigen::MatrixXd& gram);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// printf("%.17g")
std::string format_double(double x);

}  // namespace gbcm
