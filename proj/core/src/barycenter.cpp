#include "gbcm/barycenter.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gbcm/error.hpp"
#include "gbcm/parallel.hpp"
#include "gbcm/simplex.hpp"

namespace gbcm {

void BarycenterProblem::validate(const MarkovChain& chain) const {
  if (references.empty()) throw DomainError("barycenter: need at least one reference");
  if (lambda.size() != static_cast<int>(references.size())) {
    throw DomainError("barycenter: weight count does not match reference count");
  }
  if (!on_simplex(lambda, 1e-12)) throw DomainError("barycenter: weights are not on the simplex");
  if (!(eps > 0.0)) throw DomainError("barycenter: step eps must be positive");
  if (!(tol > 0.0)) throw DomainError("barycenter: tolerance must be positive");
  for (const auto& r : references) {
    if (r.size() != chain.num_nodes()) throw DomainError("barycenter: reference size mismatch");
  }
  if (init == InitKind::explicit_measure && !init_measure) {
    throw DomainError("barycenter: explicit init requires a measure");
  }
}

TangentData tangent_data(const MarkovChain& chain, const Eigen::VectorXd& nu,
                         const std::vector<Measure>& references, const GeodesicOptions& geo,
                         int threads) {
  const int p = static_cast<int>(references.size());
  GeodesicSolver solver(chain, geo);
  std::vector<GeodesicSolution> sols(p);
  parallel_for(p, threads, [&](int i) { sols[i] = solver.solve(nu, references[i].density()); });
  TangentData out;
  for (int i = 0; i < p; ++i) {
    if (!sols[i].converged) {
      throw DomainError("geodesic to reference " + std::to_string(i) + " did not converge");
    }
    out.momenta.push_back(initial_momentum(sols[i], chain));
    out.sq_distances.push_back(sols[i].action);
  }
  return out;
}

EdgeField combine_fields(const std::vector<EdgeField>& fields, const Eigen::VectorXd& lambda) {
  EdgeField f = EdgeField::zeros(fields.front().size());
  for (size_t i = 0; i < fields.size(); ++i) {
    f.forward += lambda[i] * fields[i].forward;
    f.backward += lambda[i] * fields[i].backward;
  }
  return f;
}

EdgeField variance_gradient_field(const MarkovChain& chain, const Measure& nu,
                                  const std::vector<Measure>& references,
                                  const Eigen::VectorXd& lambda, const GeodesicOptions& geo,
                                  int threads) {
  return combine_fields(tangent_data(chain, nu.density(), references, geo, threads).momenta,
                        lambda);
}

Eigen::VectorXd descent_candidate(const Eigen::VectorXd& nu, const EdgeField& field, double eps,
                                  const MarkovChain& chain, const AdmissibleMean& mean,
                                  StepTransport transport) {
  if (!field.is_skew(1e-12 * (1.0 + field.forward.cwiseAbs().maxCoeff()))) {
    throw DomainError("descent step: field is not skew-symmetric");
  }
  Eigen::VectorXd flux = field.forward;
  if (transport == StepTransport::theta_scaled) {
    flux = flux.cwiseProduct(edge_mean(nu.cwiseMax(0.0), mean, chain));
  }
  return nu - eps * graph_divergence_skew(flux, chain);
}

DescentStepResult descent_step(const Eigen::VectorXd& nu, const EdgeField& field, double eps,
                               const MarkovChain& chain, const AdmissibleMean& mean,
                               StepTransport transport) {
  DescentStepResult r;
  r.eps_used = eps;
  for (r.halvings = 0; r.halvings <= 60; ++r.halvings) {
    r.nu = descent_candidate(nu, field, r.eps_used, chain, mean, transport);
    if ((r.nu.array() >= 0.0).all()) return r;
    r.eps_used *= 0.5;
  }
  throw DomainError("descent step blocked at simplex boundary");
}

namespace {

double objective(const Eigen::VectorXd& lambda, const std::vector<double>& sq) {
  double j = 0.0;
  for (int i = 0; i < lambda.size(); ++i) j += 0.5 * lambda[i] * sq[i];
  return j;
}

int best_reference(const MarkovChain& chain, const BarycenterProblem& pb) {
  const int p = static_cast<int>(pb.references.size());
  if (p == 1) return 0;
  // W^2 for each unordered pair, computed once.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) pairs.push_back({i, j});
  GeodesicSolver solver(chain, pb.geodesic);
  std::vector<double> sq(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), pb.threads, [&](int k) {
    auto [i, j] = pairs[k];
    sq[k] = solver.solve(pb.references[i].density(), pb.references[j].density()).action;
  });
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p, p);
  for (size_t k = 0; k < pairs.size(); ++k) {
    D(pairs[k].first, pairs[k].second) = D(pairs[k].second, pairs[k].first) = sq[k];
  }
  int best = 0;
  double best_j = std::numeric_limits<double>::infinity();
  for (int j = 0; j < p; ++j) {
    double v = 0.5 * pb.lambda.dot(D.col(j));
    if (v < best_j) {
      best_j = v;
      best = j;
    }
  }
  return best;
}

}  // namespace

SynthesisResult synthesize(const MarkovChain& chain, const BarycenterProblem& pb) {
  pb.validate(chain);
  SynthesisTrace trace;
  Eigen::VectorXd nu;
  switch (pb.init) {
    case InitKind::first_reference:
      trace.init_index = 0;
      nu = pb.references[0].density();
      break;
    case InitKind::best_reference:
      trace.init_index = best_reference(chain, pb);
      nu = pb.references[trace.init_index].density();
      break;
    case InitKind::explicit_measure:
      nu = pb.init_measure->density();
      break;
  }

  const AdmissibleMean& mean = pb.geodesic.mean;
  TangentData td = tangent_data(chain, nu, pb.references, pb.geodesic, pb.threads);
  double j_cur = objective(pb.lambda, td.sq_distances);
  Eigen::VectorXd best_nu = nu;
  double best_j = j_cur;
  bool guard_warned = false;

  for (int k = 0; k < pb.max_outer; ++k) {
    EdgeField field = combine_fields(td.momenta, pb.lambda);
    SynthesisStep rec;
    rec.objective = j_cur;

    double eps = pb.eps;
    DescentStepResult step;
    TangentData next;
    double j_next = 0.0;
    for (int g = 0;; ++g) {
      step = descent_step(nu, field, eps, chain, mean, pb.transport);
      rec.halvings += step.halvings;
      next = tangent_data(chain, step.nu, pb.references, pb.geodesic, pb.threads);
      j_next = objective(pb.lambda, next.sq_distances);
      double slack = pb.descent_slack + pb.guard_noise * j_cur * std::sqrt(pb.geodesic.tol);
      if (j_next <= j_cur + slack) break;
      if (g >= pb.max_guard_halvings) {
        if (!guard_warned) {
          trace.warnings.push_back("descent guard exhausted; accepting step above objective slack");
          guard_warned = true;
        }
        break;
      }
      eps = step.eps_used * 0.5;
      ++rec.halvings;
    }
    rec.eps_used = step.eps_used;
    rec.step_norm = pi_norm(step.nu - nu, chain);
    trace.steps.push_back(rec);

    nu = std::move(step.nu);
    td = std::move(next);
    j_cur = j_next;
    if (j_cur < best_j) {
      best_j = j_cur;
      best_nu = nu;
    }
    if (rec.step_norm < pb.tol) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.converged) {
    trace.warnings.push_back("outer iteration cap reached; returning best iterate");
    nu = best_nu;
    j_cur = best_j;
  }
  trace.final_objective = j_cur;
  return {Measure::from_density(chain, nu), std::move(trace)};
}

Eigen::MatrixXd gram_matrix(const MarkovChain& chain, const Eigen::VectorXd& nu,
                            const std::vector<EdgeField>& momenta, const AdmissibleMean& mean,
                            TangentWeighting weighting) {
  const int p = static_cast<int>(momenta.size());
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      A(i, j) = A(j, i) = tangent_inner(nu, momenta[i], momenta[j], mean, chain, weighting);
    }
  }
  return A;
}

AnalysisResult analyze(const MarkovChain& chain, const Measure& nu,
                       const std::vector<Measure>& references, const GeodesicOptions& geo,
                       int threads, TangentWeighting weighting) {
  if (references.empty()) throw DomainError("analysis: need at least one reference");
  TangentData td = tangent_data(chain, nu.density(), references, geo, threads);
  AnalysisResult r;
  r.gram = gram_matrix(chain, nu.density(), td.momenta, geo.mean, weighting);
  auto qp = solve_simplex_qp(r.gram);
  r.lambda = qp.lambda;
  r.value = qp.value;
  r.qp_converged = qp.converged;
  r.qp_iterations = qp.iterations;
  return r;
}

}  // namespace gbcm
