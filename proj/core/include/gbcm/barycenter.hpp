#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbcm/geodesic.hpp"
#include "gbcm/graph.hpp"

namespace gbcm {

enum class InitKind { first_reference, best_reference, explicit_measure };

// What the descent step moves: div(theta(nu) * field) follows the continuity
// equation; raw applies div(field) directly.
enum class StepTransport { theta_scaled, raw };

struct BarycenterProblem {
  std::vector<Measure> references;
  Eigen::VectorXd lambda;
  double eps = 0.25;
  double tol = 1e-10;
  int max_outer = 10000;
  GeodesicOptions geodesic;
  InitKind init = InitKind::best_reference;
  std::optional<Measure> init_measure;
  StepTransport transport = StepTransport::theta_scaled;
  // Descent guard: a step raising the objective by more than
  //   descent_slack + guard_noise * J * sqrt(geodesic.tol)
  // is retried with half the step, at most max_guard_halvings times. The
  // second term is the accuracy of J itself; guard_noise = 0 gives the plain
  // absolute slack.
  int max_guard_halvings = 8;
  double descent_slack = 1e-9;
  double guard_noise = 1.0;
  int threads = 1;

  void validate(const MarkovChain& chain) const;
};

struct SynthesisStep {
  double step_norm = 0.0;
  double objective = 0.0;  // at the iterate before the step
  int halvings = 0;
  double eps_used = 0.0;
};

struct SynthesisTrace {
  std::vector<SynthesisStep> steps;
  bool converged = false;
  int init_index = -1;  // -1 for an explicit init
  double final_objective = 0.0;
  std::vector<std::string> warnings;
};

struct SynthesisResult {
  Measure barycenter;
  SynthesisTrace trace;
};

// Initial momenta of the geodesics from nu to each reference, with their
// squared lengths. Geodesics run concurrently on `threads` workers.
struct TangentData {
  std::vector<EdgeField> momenta;
  std::vector<double> sq_distances;
};
TangentData tangent_data(const MarkovChain& chain, const Eigen::VectorXd& nu,
                         const std::vector<Measure>& references, const GeodesicOptions& geo,
                         int threads = 1);

// sum_i lambda_i m_{nu, nu_i}(0)
EdgeField variance_gradient_field(const MarkovChain& chain, const Measure& nu,
                                  const std::vector<Measure>& references,
                                  const Eigen::VectorXd& lambda, const GeodesicOptions& geo,
                                  int threads = 1);
EdgeField combine_fields(const std::vector<EdgeField>& fields, const Eigen::VectorXd& lambda);

// nu - eps div(theta(nu) * field), no positivity safeguard.
Eigen::VectorXd descent_candidate(const Eigen::VectorXd& nu, const EdgeField& field, double eps,
                                  const MarkovChain& chain, const AdmissibleMean& mean,
                                  StepTransport transport = StepTransport::theta_scaled);

struct DescentStepResult {
  Eigen::VectorXd nu;
  double eps_used = 0.0;
  int halvings = 0;
};

// Candidate with eps halved until all entries are nonnegative (at most 60
// halvings).
DescentStepResult descent_step(const Eigen::VectorXd& nu, const EdgeField& field, double eps,
                               const MarkovChain& chain, const AdmissibleMean& mean,
                               StepTransport transport = StepTransport::theta_scaled);

SynthesisResult synthesize(const MarkovChain& chain, const BarycenterProblem& problem);

Eigen::MatrixXd gram_matrix(const MarkovChain& chain, const Eigen::VectorXd& nu,
                            const std::vector<EdgeField>& momenta, const AdmissibleMean& mean,
                            TangentWeighting weighting = TangentWeighting::chain);

struct AnalysisResult {
  Eigen::VectorXd lambda;
  double value = 0.0;
  Eigen::MatrixXd gram;
  bool qp_converged = false;
  int qp_iterations = 0;
};

AnalysisResult analyze(const MarkovChain& chain, const Measure& nu,
                       const std::vector<Measure>& references, const GeodesicOptions& geo,
                       int threads = 1, TangentWeighting weighting = TangentWeighting::chain);

}  // namespace gbcm
