#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbcm/experiments.hpp"
#include "gbcm/graph.hpp"

namespace gbcm::cli {

// All renderers are deterministic: fixed canvas, coordinates at three
// decimals, no timestamps.

// bins = 0 uses ceil(sqrt(count)).
std::string svg_histogram(const std::vector<double>& values, const std::string& title, int bins = 0);
// One polyline of log10(value) against index per series.
std::string svg_log_lines(const std::vector<std::vector<double>>& series, const std::string& title);
std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::string& title, const std::string& xlabel);
// One circle per node at its position, radius increasing with probability.
// Empty when the graph has no positions.
std::optional<std::string> svg_measure(const Graph& g, const Eigen::VectorXd& prob,
                                       const std::string& title);

int default_bin_count(size_t count);

// Writes the plots for an experiment into dir; returns the file names written
// and appends a notice for every skipped render.
std::vector<std::string> emit_plots(const ExperimentResult& result, const std::string& dir,
                                    std::vector<std::string>& notices);

}  // namespace gbcm::cli
