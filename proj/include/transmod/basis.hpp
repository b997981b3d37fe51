#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "transmod/types.hpp"

namespace transmod {

// Bounded response interval on which polynomial bases live.
struct Support {
  double lower = 0.0;
  double upper = 1.0;

  Support() = default;
  Support(double lo, double hi);

  double width() const { return upper - lower; }
  // Maps y onto [0,1]; values outside [0,1] indicate extrapolation.
  double rescale(double y) const { return (y - lower) / (upper - lower); }
  double clamp(double y) const;
};

// Pair (i, j) encoding the linear constraint theta[j] - theta[i] >= 0.
// i == -1 encodes plain positivity theta[j] >= 0.
struct MonotonicityConstraint {
  std::vector<std::pair<Index, Index>> pairs;

  Index rows() const { return static_cast<Index>(pairs.size()); }
  // Dense difference matrix (rows x dim), mostly for tests and serialization.
  Matrix dense(Index dim) const;
  bool satisfied(const Vector& theta, double slack = 0.0) const;
};

// Bernstein polynomial basis of order M on a bounded support. Evaluation
// inside the support uses the de Casteljau-style all-basis recurrence;
// outside the support the basis continues linearly with the boundary slope
// so h stays monotone and unbounded.
class BernsteinBasis {
 public:
  BernsteinBasis(int order, Support support);

  int order() const { return order_; }
  const Support& support() const { return support_; }
  Index dim() const { return order_ + 1; }

  void eval(double y, Eigen::Ref<Vector> out) const;
  void deriv(double y, Eigen::Ref<Vector> out) const;
  Vector eval(double y) const;
  Vector deriv(double y) const;

  // Coefficients of the order-(M+1) basis representing the same polynomial.
  static Vector elevate(const Vector& theta);

 private:
  // Basis values at a rescaled point t in [0,1] for the given order.
  static void raw_eval(int order, double t, double* out);

  int order_;
  Support support_;
};

// Basis (1, y): together with a positivity constraint on the slope this is
// the probit-link route to a plain normal model.
class LinearBasis {
 public:
  LinearBasis() = default;
  explicit LinearBasis(Support support) : support_(support) {}

  const Support& support() const { return support_; }
  Index dim() const { return 2; }

  void eval(double y, Eigen::Ref<Vector> out) const;
  void deriv(double y, Eigen::Ref<Vector> out) const;

 private:
  Support support_;
};

// Kronecker product of a response basis and a covariate basis; the covariate
// is clamped to its support so profiles slightly outside stay evaluable.
// Component p = y_index * (M_x + 1) + x_index.
class TensorBasis {
 public:
  TensorBasis(BernsteinBasis response, std::string covariate, BernsteinBasis covariate_basis);

  const BernsteinBasis& response_basis() const { return response_; }
  const BernsteinBasis& covariate_basis() const { return covariate_basis_; }
  const std::string& covariate() const { return covariate_; }
  Index dim() const { return response_.dim() * covariate_basis_.dim(); }

  void eval(double y, double xval, Eigen::Ref<Vector> out) const;
  void deriv(double y, double xval, Eigen::Ref<Vector> out) const;

 private:
  BernsteinBasis response_;
  std::string covariate_;
  BernsteinBasis covariate_basis_;
};

// Response-varying coefficient of a numeric covariate: b_M(y) * x. The
// covariate must be non-negative, otherwise scaling by it flips the sign of
// dh/dy and no coefficient constraint can keep h monotone for all rows.
class VaryingCoefBasis {
 public:
  VaryingCoefBasis(BernsteinBasis response, std::string covariate);

  const BernsteinBasis& response_basis() const { return response_; }
  const std::string& covariate() const { return covariate_; }
  Index dim() const { return response_.dim(); }

  void eval(double y, double xval, Eigen::Ref<Vector> out) const;
  void deriv(double y, double xval, Eigen::Ref<Vector> out) const;

 private:
  BernsteinBasis response_;
  std::string covariate_;
};

using BasisBlock = std::variant<LinearBasis, BernsteinBasis, TensorBasis, VaryingCoefBasis>;

Index block_dim(const BasisBlock& block);
// Name of the covariate a block reads, or "" for pure response blocks.
std::string block_covariate(const BasisBlock& block);
void block_eval(const BasisBlock& block, double y, double xval, Eigen::Ref<Vector> out);
void block_deriv(const BasisBlock& block, double y, double xval, Eigen::Ref<Vector> out);

// Concatenation of basis blocks; the full transformation term is
// a(y, x)^T theta with theta split across blocks in order.
class TransformationBasis {
 public:
  TransformationBasis() = default;
  explicit TransformationBasis(std::vector<BasisBlock> blocks);

  const std::vector<BasisBlock>& blocks() const { return blocks_; }
  Index dim() const { return dim_; }
  // Offset of block b within the concatenated coefficient vector.
  Index block_offset(std::size_t b) const { return offsets_[b]; }
  // Covariate names required for evaluation, one entry per block ("" when unused).
  std::vector<std::string> covariates() const;

  // xvals holds one value per block (ignored for response-only blocks).
  void eval(double y, const std::vector<double>& xvals, Eigen::Ref<Vector> out) const;
  void deriv(double y, const std::vector<double>& xvals, Eigen::Ref<Vector> out) const;

  MonotonicityConstraint monotonicity_rows() const;

 private:
  std::vector<BasisBlock> blocks_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
};

}  // namespace transmod
