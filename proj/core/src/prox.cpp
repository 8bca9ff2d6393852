#include "gbcm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gbcm/error.hpp"

namespace gbcm {

MomentumSlack prox_action_pointwise(double m0, double theta0, double tau) {
  if (!(tau > 0.0)) throw DomainError("prox: step must be positive");
  if (m0 == 0.0) return {0.0, std::max(theta0, 0.0)};

  // Stationarity gives m = m0 theta / (theta + tau) and, with s = theta + tau,
  // the cubic p(s) = s^2 (s - a) - c. Its positive root exceeds max(a, 0) and p
  // is convex beyond that point, so Newton from above decreases monotonically.
  const double a = tau + theta0;
  const double c = 0.5 * tau * m0 * m0;
  if (theta0 <= -c / (tau * tau)) return {0.0, 0.0};

  auto p = [&](double s) { return s * s * (s - a) - c; };
  double lo = std::max(a, 0.0);
  double hi = lo + (a > 0.0 ? std::min(std::cbrt(c), c / (a * a)) : std::cbrt(c));
  double s = hi;
  bool ok = false;
  for (int it = 0; it < 100; ++it) {
    double ps = p(s);
    // From above the iterates only cross the root through rounding.
    if (ps <= 0.0) {
      ok = true;
      break;
    }
    double dp = s * (3.0 * s - 2.0 * a);
    double step = ps / dp;
    if (!(step > 0.0) || !std::isfinite(step)) break;
    s -= step;
    if (step <= 1e-14 * s) {
      ok = true;
      break;
    }
  }
  if (!ok || s < lo) {
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (p(mid) > 0.0 ? hi : lo) = mid;
    }
    s = 0.5 * (lo + hi);
  }
  double theta = s - tau;
  if (theta <= 0.0) return {0.0, 0.0};
  return {m0 * theta / s, theta};
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

bool inside(const AdmissibleMean& mean, double eta, double s, double t) {
  return s >= 0.0 && t >= 0.0 && eta <= mean_eval(mean, s, t);
}

// Root of the increasing function f on [lo, hi] (f(lo) < 0 < f(hi)) starting
// from x0. Newton steps leaving the bracket fall back to bisection.
template <class F>
double safeguarded_root(F f, double lo, double hi, double x0) {
  double x = x0;
  for (int it = 0; it < 100; ++it) {
    auto [fx, dfx] = f(x);
    if (fx == 0.0) return x;
    (fx < 0.0 ? lo : hi) = x;
    double next = x - fx / dfx;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4e-16 * std::abs(x) || hi - lo <= 4e-16 * std::abs(hi)) return next;
    x = next;
  }
  return x;
}

HypographPoint project_geometric(double eta0, double s0, double t0) {
  // Rotated coordinates a = (s+t)/sqrt2, b = (s-t)/sqrt2 turn the hypograph
  // of sqrt(st) (for eta > 0) into the cone b^2 + 2 eta^2 <= a^2, a >= 0.
  // KKT: a = a0/(1-2mu), b = b0/(1+2mu), eta = eta0/(1+4mu), mu > 0.
  const double a0 = (s0 + t0) / kSqrt2;
  const double b0 = (s0 - t0) / kSqrt2;
  const double ab = std::abs(b0), ae = kSqrt2 * eta0;

  if (a0 <= 0.0 && b0 * b0 + 0.5 * eta0 * eta0 <= a0 * a0) return {0.0, 0.0, 0.0};

  double mu;
  if (a0 > 0.0) {
    // r = 1 - 2mu in (0, 1): r |(b0/(2-r), sqrt2 eta0/(3-2r))| = a0, convex
    // increasing in r, so Newton from r = 1 decreases monotonically.
    auto g = [&](double r) {
      double p = 2.0 - r, q = 3.0 - 2.0 * r;
      double f1 = r * ab / p, f2 = r * ae / q;
      double d1 = 2.0 * ab / (p * p), d2 = 3.0 * ae / (q * q);
      double nrm = std::sqrt(f1 * f1 + f2 * f2);
      double d = nrm > 0.0 ? (f1 * d1 + f2 * d2) / nrm : std::sqrt(d1 * d1 + d2 * d2);
      return std::pair<double, double>(nrm - a0, d);
    };
    mu = 0.5 * (1.0 - safeguarded_root(g, 0.0, 1.0, 1.0));
  } else if (a0 < 0.0) {
    // r = 2mu - 1 > 0: r |(b0/(2+r), sqrt2 eta0/(3+2r))| = -a0
    auto g = [&](double r) {
      double p = 2.0 + r, q = 3.0 + 2.0 * r;
      double f1 = r * ab / p, f2 = r * ae / q;
      double d1 = 2.0 * ab / (p * p), d2 = 3.0 * ae / (q * q);
      double nrm = std::sqrt(f1 * f1 + f2 * f2);
      double d = nrm > 0.0 ? (f1 * d1 + f2 * d2) / nrm : std::sqrt(d1 * d1 + d2 * d2);
      return std::pair<double, double>(nrm + a0, d);
    };
    double hi = 1.0;
    while (g(hi).first < 0.0 && hi < 1e300) hi *= 2.0;
    mu = 0.5 * (1.0 + safeguarded_root(g, 0.0, hi, 0.5 * hi));
  } else {
    mu = 0.5;
  }
  double b = b0 / (1.0 + 2.0 * mu);
  double eta = eta0 / (1.0 + 4.0 * mu);
  double a = std::sqrt(b * b + 2.0 * eta * eta);
  double s = std::max(0.0, (a + b) / kSqrt2);
  double t = std::max(0.0, (a - b) / kSqrt2);
  return {std::min(eta, std::sqrt(s * t)), s, t};
}

// Gradient of the mean at (s, t) with s, t > 0.
void mean_gradient(const AdmissibleMean& mean, double s, double t, double& ds, double& dt) {
  if (mean.kind == MeanKind::geometric) {
    ds = 0.5 * std::sqrt(t / s);
    dt = 0.5 * std::sqrt(s / t);
    return;
  }
  double L = mean_eval(mean, s, t);
  double u = t / s - 1.0;
  if (std::abs(u) < 1e-3) {
    dt = 0.5 - u / 6.0 + u * u / 8.0;
  } else {
    double D = std::log(s) - std::log(t);
    dt = (L / t - 1.0) / D;
  }
  // Euler: L = s ds + t dt
  ds = (L - t * dt) / s;
}

}  // namespace

HypographPoint project_mean_hypograph_search(const AdmissibleMean& mean, double eta0, double s0,
                                             double t0) {
  if (inside(mean, eta0, s0, t0)) return {eta0, s0, t0};
  if (eta0 <= 0.0) return {eta0, std::max(s0, 0.0), std::max(t0, 0.0)};

  // For eta0 > 0 the projection lies on a ray u(phi) = (mean(c, s), c, s),
  // c = cos phi, s = sin phi. Maximize psi(phi) = <x0, u> / |u|.
  auto ray = [&](double phi, double& ue, double& us, double& ut) {
    us = std::cos(phi);
    ut = std::sin(phi);
    ue = mean_eval(mean, std::max(us, 0.0), std::max(ut, 0.0));
  };
  auto psi = [&](double phi) {
    double ue, us, ut;
    ray(phi, ue, us, ut);
    return (eta0 * ue + s0 * us + t0 * ut) / std::sqrt(ue * ue + us * us + ut * ut);
  };
  auto dpsi_sign = [&](double phi) {
    double ue, us, ut;
    ray(phi, ue, us, ut);
    double gs, gt;
    mean_gradient(mean, us, ut, gs, gt);
    double ve = -ut * gs + us * gt, vs = -ut, vt = us;
    double uu = ue * ue + us * us + ut * ut;
    double xu = eta0 * ue + s0 * us + t0 * ut;
    double xv = eta0 * ve + s0 * vs + t0 * vt;
    double uv = ue * ve + us * vs + ut * vt;
    return xv * uu - xu * uv;
  };

  const int kScan = 64;
  const double half_pi = M_PI / 2.0;
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    double v = psi(half_pi * k / kScan);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = half_pi * std::max(best - 1, 0) / kScan;
  double hi = half_pi * std::min(best + 1, kScan) / kScan;
  for (int it = 0; it < 80 && hi - lo > 1e-17; ++it) {
    double mid = 0.5 * (lo + hi);
    (dpsi_sign(mid) > 0.0 ? lo : hi) = mid;
  }
  double phi = 0.5 * (lo + hi);
  double cands[3] = {phi, 0.0, half_pi};
  double phi_best = phi, val = psi(phi);
  for (double c : cands) {
    double v = psi(c);
    if (v > val) {
      val = v;
      phi_best = c;
    }
  }
  if (val <= 0.0) return {0.0, 0.0, 0.0};
  double ue, us, ut;
  ray(phi_best, ue, us, ut);
  double scale = val / std::sqrt(ue * ue + us * us + ut * ut);
  return {scale * ue, scale * us, scale * ut};
}

HypographPoint project_mean_hypograph(const AdmissibleMean& mean, double eta0, double s0,
                                      double t0) {
  if (inside(mean, eta0, s0, t0)) return {eta0, s0, t0};
  if (eta0 <= 0.0) return {eta0, std::max(s0, 0.0), std::max(t0, 0.0)};
  if (mean.kind == MeanKind::geometric) return project_geometric(eta0, s0, t0);
  return project_mean_hypograph_search(mean, eta0, s0, t0);
}

}  // namespace gbcm
