#pragma once

#include <string>

namespace gbcm {

enum class MeanKind { geometric, logarithmic };

// Positive, symmetric, 1-homogeneous, concave mean used to weight the
// action. Geometric is the default.
struct AdmissibleMean {
  MeanKind kind = MeanKind::geometric;

  double operator()(double s, double t) const;
  std::string name() const;
  static AdmissibleMean parse(const std::string& name);
};

// Throws DomainError for negative arguments.
double mean_eval(const AdmissibleMean& mean, double s, double t);

}  // namespace gbcm
