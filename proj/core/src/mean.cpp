#include "gbcm/mean.hpp"

#include <cmath>

#include "gbcm/error.hpp"

namespace gbcm {

namespace {

double logarithmic_mean(double s, double t) {
  if (s == t) return s;
  if (s == 0.0 || t == 0.0) return 0.0;
  // (s - t) / (log s - log t) = s * u / log1p(u) with u = t/s - 1
  double u = t / s - 1.0;
  if (std::abs(u) < 1e-4) {
    return s * (1.0 + u / 2.0 - u * u / 12.0 + u * u * u / 24.0);
  }
  return s * u / std::log1p(u);
}

}  // namespace

double mean_eval(const AdmissibleMean& mean, double s, double t) {
  if (s < 0.0 || t < 0.0 || std::isnan(s) || std::isnan(t)) {
    throw DomainError("mean: negative argument");
  }
  switch (mean.kind) {
    case MeanKind::geometric:
      return std::sqrt(s * t);
    case MeanKind::logarithmic:
      return logarithmic_mean(s, t);
  }
  return 0.0;
}

double AdmissibleMean::operator()(double s, double t) const { return mean_eval(*this, s, t); }

std::string AdmissibleMean::name() const {
  return kind == MeanKind::geometric ? "geometric" : "logarithmic";
}

AdmissibleMean AdmissibleMean::parse(const std::string& name) {
  if (name == "geometric") return {MeanKind::geometric};
  if (name == "logarithmic") return {MeanKind::logarithmic};
  throw DomainError("mean: unknown mean '" + name + "'");
}

}  // namespace gbcm
