#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transmod/model.hpp"

namespace transmod {

struct FitOptions {
  int max_iterations = 500;   // quasi-Newton stage
  int max_polish = 200;       // damped-Newton stage
  double grad_tol = 1e-8;     // on max|working gradient| / n
  double eps_mono = 1e-8;     // slack below which a constraint counts as active
  double start_floor = 1e-3;  // smallest increment used by start values

  void validate() const;
};

struct ConvergenceReport {
  int iterations = 0;
  double grad_norm = 0.0;  // max|working gradient| / n at exit
  bool converged = false;
  // Constraint pair indices whose increment sits within eps_mono of zero;
  // Wald intervals touching these parameters are unreliable.
  std::vector<Index> active_constraints;
};

struct FittedModel {
  ModelSpec spec;
  Vector theta;
  double loglik = 0.0;
  Matrix vcov;
  ConvergenceReport report;
  std::vector<std::string> param_names;
  Index n_obs = 0;
  double weight_sum = 0.0;
  std::uint64_t data_hash = 0;  // fingerprint of (response, weights) fitted on
};

// Smooth bijection between the constrained parameter vector and a free
// working vector: indices that are never the larger side of a difference
// constraint pass through unchanged; every constrained index adds
// softplus(omega) to its base (or to zero for plain positivity), so all
// working vectors map to strictly feasible parameters.
class WorkingMap {
 public:
  WorkingMap(MonotonicityConstraint constraint, Index dim);

  Index dim() const { return dim_; }
  const MonotonicityConstraint& constraint() const { return constraint_; }

  Vector to_theta(const Vector& omega) const;
  // Requires strict feasibility (every increment > 0).
  Vector from_theta(const Vector& theta) const;

  // Chain rule dll/domega from dll/dtheta. When adjoint is non-null it
  // receives the accumulated per-index adjoints needed by pull_hessian.
  Vector pull_gradient(const Vector& omega, const Vector& grad_theta,
                       Vector* adjoint = nullptr) const;
  // dtheta/domega; lower triangular with positive diagonal.
  Matrix jacobian(const Vector& omega) const;
  // J^T H J plus the softplus curvature term.
  Matrix pull_hessian(const Vector& omega, const Matrix& hess_theta,
                      const Vector& grad_theta) const;

  std::vector<Index> active_set(const Vector& theta, double eps) const;

 private:
  MonotonicityConstraint constraint_;
  Index dim_;
  // Per index: -2 free, -1 positivity-constrained, otherwise the base index.
  std::vector<Index> base_;
};

// Data-driven feasible start: per stratum cell, the trafo block is a ridge
// least-squares fit of the link-transformed weighted midpoint ECDF, with
// increments floored to keep it strictly feasible; shift coefficients start
// at zero.
Vector start_values(const LikelihoodProblem& prob, const FitOptions& opts);

FittedModel mle(const ModelSpec& spec, const Dataset& d, const FitOptions& opts = {});
FittedModel mle_weighted(const ModelSpec& spec, const Dataset& d, Vector weights,
                         const FitOptions& opts = {});
FittedModel mle_problem(const LikelihoodProblem& prob, const FitOptions& opts = {});

struct IntervalRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool shift_param = false;
  bool boundary = false;  // touched by an active monotonicity constraint
};

std::vector<IntervalRow> confint(const FittedModel& fm, double level);

// Odds-ratio presentation of a logit shift coefficient: "1.19 (1.08-1.31)".
std::string format_or(double estimate, double se, double level);

struct LrComparison {
  double loglik_a = 0.0;
  double loglik_b = 0.0;
  double difference = 0.0;  // loglik_a - loglik_b
  Index params_a = 0;
  Index params_b = 0;
};

// Informal likelihood comparison; both models must be fits of the same
// response and weights.
LrComparison lr_compare(const FittedModel& a, const FittedModel& b);

}  // namespace transmod
