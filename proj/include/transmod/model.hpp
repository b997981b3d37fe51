#pragma once

#include <string>
#include <vector>

#include "transmod/basis.hpp"
#include "transmod/data.hpp"
#include "transmod/link.hpp"
#include "transmod/types.hpp"

namespace transmod {

// Declarative model: P(Y <= y | x) = F( a(y,x)^T theta_cell(x) - s(x)^T beta ).
// Parameters are laid out as [theta block per stratum cell || beta], so the
// total count is cells * dim(trafo) + dim(shifts).
struct ModelSpec {
  Link link;
  std::string response;
  TransformationBasis trafo;
  StratumIndex strata;  // trivial() when unstratified
  ShiftDesign shifts;   // dim() == 0 when there are no shift terms
  std::string formula;  // source text when lowered from a formula, else empty

  Index trafo_dim() const { return trafo.dim(); }
  Index n_cells() const { return strata.cells; }
  Index shift_dim() const { return shifts.dim(); }
  Index n_params() const { return n_cells() * trafo_dim() + shift_dim(); }
  Index theta_offset(Index cell) const { return cell * trafo_dim(); }
  Index beta_offset() const { return n_cells() * trafo_dim(); }

  std::vector<std::string> param_names() const;
  // Trafo-block monotonicity replicated across every stratum cell; beta free.
  MonotonicityConstraint constraints() const;
  // All covariates the model reads (strata, shift, basis), without duplicates.
  std::vector<std::string> covariate_names() const;
};

// Stratum cell per row of an arbitrary dataset sharing the training levels.
std::vector<Index> cells_for_dataset(const StratumIndex& s, const Dataset& d);
// Shift design matrix for an arbitrary dataset.
Matrix shift_matrix(const ShiftDesign& design, const Dataset& d);

// Covariate values read by the transformation basis, one binding per block.
struct ProfileContext {
  Index cell = 0;
  std::vector<double> block_x;
  double shift = 0.0;  // s(x)^T beta
};

ProfileContext bind_profile(const ModelSpec& spec, const Vector& theta, const Profile& x);
double h_eval(const ModelSpec& spec, const Vector& theta, double y, const ProfileContext& ctx);
double h_deriv(const ModelSpec& spec, const Vector& theta, double y, const ProfileContext& ctx);
double h_eval(const ModelSpec& spec, const Vector& theta, double y, const Profile& x);

// Design matrices binding a spec to a dataset; the weighted log-likelihood,
// its analytic score and Hessian, and per-observation score rows are all
// computed from these. Observation sums are chunked deterministically, so
// results are bit-identical for any thread count.
class LikelihoodProblem {
 public:
  LikelihoodProblem(const ModelSpec& spec, const Dataset& d);
  LikelihoodProblem(const ModelSpec& spec, const Dataset& d, Vector weight_override);

  Index n() const { return A_.rows(); }
  Index n_params() const { return spec_.n_params(); }
  const ModelSpec& spec() const { return spec_; }
  const Vector& weights() const { return w_; }
  const Vector& response() const { return y_; }
  const std::vector<Index>& cells() const { return cell_; }
  const Matrix& basis() const { return A_; }
  const Matrix& basis_deriv() const { return Ad_; }
  const Matrix& shifts() const { return S_; }

  // sum_i w_i [ log F'(h_i) + log h'_i ]; throws NonMonotoneError when
  // h' <= 0 at any observation.
  double loglik(const Vector& theta) const;
  double loglik_score(const Vector& theta, Vector& grad) const;
  Vector score(const Vector& theta) const;
  Matrix hessian(const Vector& theta) const;
  // n x p matrix of w_i-weighted per-observation score contributions;
  // its column sums equal score().
  Matrix score_matrix(const Vector& theta) const;

 private:
  void build(const Dataset& d);

  ModelSpec spec_;
  Vector y_;
  Vector w_;
  std::vector<Index> cell_;
  Matrix A_;   // n x trafo_dim
  Matrix Ad_;  // n x trafo_dim
  Matrix S_;   // n x shift_dim
};

}  // namespace transmod
