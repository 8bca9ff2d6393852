#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "gbcm/io.hpp"

namespace gbcm::cli {

namespace {

constexpr double kW = 640, kH = 420, kL = 60, kR = 20, kT = 40, kB = 50;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
         "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<line x1=\"" + num(kL) + "\" y1=\"" + num(kH - kB) + "\" x2=\"" + num(kW - kR) + "\" y2=\"" +
       num(kH - kB) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kL) + "\" y1=\"" + num(kT) + "\" x2=\"" + num(kL) + "\" y2=\"" + num(kH - kB) +
       "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kH - kB + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(xv) + "</text>\n";
    s += "<text x=\"" + num(kL - 6) + "\" y=\"" + num(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(yv) + "</text>\n";
  }
  s += "<text x=\"" + num((kL + kW - kR) / 2) + "\" y=\"" + num(kH - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"14\" y=\"" + num((kT + kH - kB) / 2) + "\" transform=\"rotate(-90 14 " +
       num((kT + kH - kB) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(ylabel) + "</text>\n";
  return s;
}

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    double c = std::isfinite(lo) ? lo : 0.0;
    lo = c - 0.5;
    hi = c + 0.5;
  }
}

}  // namespace

int default_bin_count(size_t count) {
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
}

std::string svg_histogram(const std::vector<double>& values, const std::string& title, int bins) {
  if (bins <= 0) bins = default_bin_count(values.size());
  double lo = 0, hi = 1;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  widen(lo, hi);
  std::vector<int> counts(bins, 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  int cmax = std::max(1, values.empty() ? 1 : *std::max_element(counts.begin(), counts.end()));
  Frame f{lo, hi, 0.0, static_cast<double>(cmax)};
  std::string s = header(title) + axes(f, "value", "count");
  if (!values.empty()) {
    for (int b = 0; b < bins; ++b) {
      double xa = f.px(lo + (hi - lo) * b / bins), xb = f.px(lo + (hi - lo) * (b + 1) / bins);
      double y = f.py(counts[b]);
      s += "<rect x=\"" + num(xa) + "\" y=\"" + num(y) + "\" width=\"" + num(xb - xa) + "\" height=\"" +
           num(kH - kB - y) + "\" fill=\"steelblue\" stroke=\"white\"/>\n";
    }
  }
  return s + "</svg>\n";
}

std::string svg_log_lines(const std::vector<std::vector<double>>& series, const std::string& title) {
  double xmax = 1, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    xmax = std::max(xmax, static_cast<double>(s.size()) - 1.0);
    for (double v : s)
      if (v > 0) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
  }
  if (!std::isfinite(ymin)) ymin = ymax = 0.0;
  widen(ymin, ymax);
  Frame f{0.0, xmax, ymin, ymax};
  std::string out = header(title) + axes(f, "iteration", "log10 step norm");
  for (const auto& s : series) {
    std::string pts;
    for (size_t k = 0; k < s.size(); ++k) {
      if (!(s[k] > 0)) continue;
      pts += num(f.px(static_cast<double>(k))) + "," + num(f.py(std::log10(s[k]))) + " ";
    }
    if (!pts.empty()) {
      out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.6\" points=\"" + pts + "\"/>\n";
    }
  }
  return out + "</svg>\n";
}

std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::string& title, const std::string& xlabel) {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
    y0 = *std::min_element(y.begin(), y.end());
    y1 = *std::max_element(y.begin(), y.end());
  }
  widen(x0, x1);
  widen(y0, y1);
  Frame f{x0, x1, y0, y1};
  std::string s = header(title) + axes(f, xlabel, "value");
  for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
    s += "<circle cx=\"" + num(f.px(x[i])) + "\" cy=\"" + num(f.py(y[i])) + "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  return s + "</svg>\n";
}

std::optional<std::string> svg_measure(const Graph& g, const Eigen::VectorXd& prob,
                                       const std::string& title) {
  if (g.positions.empty() || prob.size() != g.num_nodes) return std::nullopt;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& p : g.positions) {
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  }
  widen(x0, x1);
  widen(y0, y1);
  const double pad = 0.08;
  Frame f{x0 - pad * (x1 - x0), x1 + pad * (x1 - x0), y0 - pad * (y1 - y0), y1 + pad * (y1 - y0)};
  std::string s = header(title);
  for (const auto& e : g.edges) {
    const auto &a = g.positions[e.u], &b = g.positions[e.v];
    s += "<line x1=\"" + num(f.px(a[0])) + "\" y1=\"" + num(f.py(a[1])) + "\" x2=\"" + num(f.px(b[0])) +
         "\" y2=\"" + num(f.py(b[1])) + "\" stroke=\"#bbbbbb\"/>\n";
  }
  const double pmax = std::max(prob.maxCoeff(), 1e-300);
  for (int i = 0; i < g.num_nodes; ++i) {
    // area proportional to probability, with a visible floor
    double r = 2.0 + 16.0 * std::sqrt(std::max(prob[i], 0.0) / pmax);
    s += "<circle cx=\"" + num(f.px(g.positions[i][0])) + "\" cy=\"" + num(f.py(g.positions[i][1])) +
         "\" r=\"" + num(r) + "\" fill=\"darkred\" fill-opacity=\"0.7\"/>\n";
  }
  return s + "</svg>\n";
}

std::vector<std::string> emit_plots(const ExperimentResult& result, const std::string& dir,
                                    std::vector<std::string>& notices) {
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& body) {
    write_file((std::filesystem::path(dir) / name).string(), body);
    written.push_back(name);
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::vector<double>> tvals;
  for (const auto& r : result.records) {
    if (!values.count(r.metric)) order.push_back(r.metric);
    values[r.metric].push_back(r.value);
    if (r.params.rfind("t=", 0) == 0) tvals[r.metric].push_back(std::stod(r.params.substr(2)));
  }
  for (const auto& m : order) {
    put("hist_" + m + ".svg", svg_histogram(values[m], result.name + ": " + m));
    if (tvals[m].size() == values[m].size()) {
      put("vs_t_" + m + ".svg", svg_scatter(tvals[m], values[m], result.name + ": " + m, "t"));
    }
  }
  if (!result.traces.empty()) put("convergence.svg", svg_log_lines(result.traces, result.name + ": step norms"));
  for (const auto& [name, prob] : result.measures) {
    auto svg = svg_measure(result.graph, prob, result.name + ": " + name);
    if (svg) put("measure_" + name + ".svg", *svg);
    else notices.push_back("no node positions; skipped render of " + name);
  }
  return written;
}

}  // namespace gbcm::cli
