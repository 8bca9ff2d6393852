#pragma once

#include "gbcm/mean.hpp"

namespace gbcm {

struct MomentumSlack {
  double m = 0.0;
  double theta = 0.0;
};

// argmin over (m, theta), theta >= 0, of
//   1/2 (m - m0)^2 + 1/2 (theta - theta0)^2 + tau * m^2 / (2 theta)
// with the convention 0/0 = 0. Requires tau > 0.
MomentumSlack prox_action_pointwise(double m0, double theta0, double tau);

struct HypographPoint {
  double eta = 0.0;
  double s = 0.0;
  double t = 0.0;
};

// Euclidean projection onto {(eta, s, t) : s, t >= 0, eta <= mean(s, t)}.
HypographPoint project_mean_hypograph(const AdmissibleMean& mean, double eta0, double s0,
                                      double t0);

// Same projection computed by a one-dimensional search over boundary rays.
// Valid for any admissible mean; used as the reference for the closed forms.
HypographPoint project_mean_hypograph_search(const AdmissibleMean& mean, double eta0, double s0,
                                             double t0);

}  // namespace gbcm
