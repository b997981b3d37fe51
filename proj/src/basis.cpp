#include "transmod/basis.hpp"

#include <algorithm>
#include <cmath>

#include "transmod/errors.hpp"

namespace transmod {

Support::Support(double lo, double hi) : lower(lo), upper(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi)))
    throw ArgumentError("support bounds must be finite");
  if (!(lo < hi)) throw ArgumentError("support requires lower < upper");
}

double Support::clamp(double y) const { return std::min(std::max(y, lower), upper); }

Matrix MonotonicityConstraint::dense(Index dim) const {
  Matrix d = Matrix::Zero(rows(), dim);
  for (Index r = 0; r < rows(); ++r) {
    const auto& [minus, plus] = pairs[static_cast<std::size_t>(r)];
    if (minus >= 0) d(r, minus) = -1.0;
    d(r, plus) = 1.0;
  }
  return d;
}

bool MonotonicityConstraint::satisfied(const Vector& theta, double slack) const {
  for (const auto& [minus, plus] : pairs) {
    const double base = minus >= 0 ? theta[minus] : 0.0;
    if (theta[plus] - base < slack) return false;
  }
  return true;
}

BernsteinBasis::BernsteinBasis(int order, Support support)
    : order_(order), support_(support) {
  if (order < 1) throw ArgumentError("Bernstein order must be >= 1");
}

// All order-M basis values at t via the triangular recurrence
// b_{k,m} = (1-t) b_{k,m-1} + t b_{k-1,m-1}, updated in place right-to-left.
// Stable for t in [0,1] because every step is a convex combination.
void BernsteinBasis::raw_eval(int order, double t, double* out) {
  out[0] = 1.0;
  const double u = 1.0 - t;
  for (int m = 1; m <= order; ++m) {
    out[m] = t * out[m - 1];
    for (int k = m - 1; k >= 1; --k) out[k] = u * out[k] + t * out[k - 1];
    out[0] *= u;
  }
}

void BernsteinBasis::eval(double y, Eigen::Ref<Vector> out) const {
  if (!std::isfinite(y)) throw ArgumentError("basis evaluation requires finite y");
  const double lo = support_.lower, hi = support_.upper;
  if (y >= lo && y <= hi) {
    raw_eval(order_, support_.rescale(y), out.data());
    return;
  }
  // Linear continuation a(bound) + (y - bound) * a'(bound) keeps h monotone
  // and unbounded beyond the support.
  const double bound = y < lo ? lo : hi;
  Vector slope(dim());
  deriv(bound, slope);
  raw_eval(order_, support_.rescale(bound), out.data());
  out += (y - bound) * slope;
}

void BernsteinBasis::deriv(double y, Eigen::Ref<Vector> out) const {
  if (!std::isfinite(y)) throw ArgumentError("basis evaluation requires finite y");
  const double t = support_.rescale(support_.clamp(y));
  const double scale = order_ / support_.width();
  // d/dy b_{k,M} = M/(u-l) * (b_{k-1,M-1} - b_{k,M-1}); constant outside the
  // support by the linear-extrapolation rule.
  Vector lower_order(order_);
  raw_eval(order_ - 1, t, lower_order.data());
  out[0] = -scale * lower_order[0];
  for (int k = 1; k < order_; ++k)
    out[k] = scale * (lower_order[k - 1] - lower_order[k]);
  out[order_] = scale * lower_order[order_ - 1];
}

Vector BernsteinBasis::eval(double y) const {
  Vector out(dim());
  eval(y, out);
  return out;
}

Vector BernsteinBasis::deriv(double y) const {
  Vector out(dim());
  deriv(y, out);
  return out;
}

Vector BernsteinBasis::elevate(const Vector& theta) {
  const Index m1 = theta.size();  // M + 1 coefficients in
  Vector out(m1 + 1);
  out[0] = theta[0];
  out[m1] = theta[m1 - 1];
  for (Index k = 1; k < m1; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(m1);
    out[k] = w * theta[k - 1] + (1.0 - w) * theta[k];
  }
  return out;
}

void LinearBasis::eval(double y, Eigen::Ref<Vector> out) const {
  if (!std::isfinite(y)) throw ArgumentError("basis evaluation requires finite y");
  out[0] = 1.0;
  out[1] = y;
}

void LinearBasis::deriv(double /*y*/, Eigen::Ref<Vector> out) const {
  out[0] = 0.0;
  out[1] = 1.0;
}

TensorBasis::TensorBasis(BernsteinBasis response, std::string covariate,
                         BernsteinBasis covariate_basis)
    : response_(response), covariate_(std::move(covariate)),
      covariate_basis_(covariate_basis) {
  if (covariate_.empty()) throw ArgumentError("tensor basis requires a covariate name");
}

void TensorBasis::eval(double y, double xval, Eigen::Ref<Vector> out) const {
  const Index ny = response_.dim(), nx = covariate_basis_.dim();
  Vector by(ny), bx(nx);
  response_.eval(y, by);
  covariate_basis_.eval(covariate_basis_.support().clamp(xval), bx);
  for (Index i = 0; i < ny; ++i)
    out.segment(i * nx, nx) = by[i] * bx;
}

void TensorBasis::deriv(double y, double xval, Eigen::Ref<Vector> out) const {
  const Index ny = response_.dim(), nx = covariate_basis_.dim();
  Vector dy(ny), bx(nx);
  response_.deriv(y, dy);
  covariate_basis_.eval(covariate_basis_.support().clamp(xval), bx);
  for (Index i = 0; i < ny; ++i)
    out.segment(i * nx, nx) = dy[i] * bx;
}

VaryingCoefBasis::VaryingCoefBasis(BernsteinBasis response, std::string covariate)
    : response_(response), covariate_(std::move(covariate)) {
  if (covariate_.empty())
    throw ArgumentError("varying-coefficient basis requires a covariate name");
}

void VaryingCoefBasis::eval(double y, double xval, Eigen::Ref<Vector> out) const {
  if (xval < 0.0)
    throw ArgumentError("varying-coefficient covariate '" + covariate_ +
                        "' must be non-negative");
  response_.eval(y, out);
  out *= xval;
}

void VaryingCoefBasis::deriv(double y, double xval, Eigen::Ref<Vector> out) const {
  if (xval < 0.0)
    throw ArgumentError("varying-coefficient covariate '" + covariate_ +
                        "' must be non-negative");
  response_.deriv(y, out);
  out *= xval;
}

Index block_dim(const BasisBlock& block) {
  return std::visit([](const auto& b) { return b.dim(); }, block);
}

std::string block_covariate(const BasisBlock& block) {
  if (const auto* t = std::get_if<TensorBasis>(&block)) return t->covariate();
  if (const auto* v = std::get_if<VaryingCoefBasis>(&block)) return v->covariate();
  return "";
}

void block_eval(const BasisBlock& block, double y, double xval, Eigen::Ref<Vector> out) {
  std::visit([&](const auto& b) {
    using T = std::decay_t<decltype(b)>;
    if constexpr (std::is_same_v<T, TensorBasis> || std::is_same_v<T, VaryingCoefBasis>)
      b.eval(y, xval, out);
    else
      b.eval(y, out);
  }, block);
}

void block_deriv(const BasisBlock& block, double y, double xval, Eigen::Ref<Vector> out) {
  std::visit([&](const auto& b) {
    using T = std::decay_t<decltype(b)>;
    if constexpr (std::is_same_v<T, TensorBasis> || std::is_same_v<T, VaryingCoefBasis>)
      b.deriv(y, xval, out);
    else
      b.deriv(y, out);
  }, block);
}

TransformationBasis::TransformationBasis(std::vector<BasisBlock> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ArgumentError("transformation basis needs at least one block");
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    offsets_.push_back(dim_);
    dim_ += block_dim(b);
  }
}

std::vector<std::string> TransformationBasis::covariates() const {
  std::vector<std::string> names;
  names.reserve(blocks_.size());
  for (const auto& b : blocks_) names.push_back(block_covariate(b));
  return names;
}

void TransformationBasis::eval(double y, const std::vector<double>& xvals,
                               Eigen::Ref<Vector> out) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    block_eval(blocks_[b], y, xvals[b], out.segment(offsets_[b], block_dim(blocks_[b])));
}

void TransformationBasis::deriv(double y, const std::vector<double>& xvals,
                                Eigen::Ref<Vector> out) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    block_deriv(blocks_[b], y, xvals[b], out.segment(offsets_[b], block_dim(blocks_[b])));
}

MonotonicityConstraint TransformationBasis::monotonicity_rows() const {
  MonotonicityConstraint c;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Index off = offsets_[b];
    if (std::holds_alternative<LinearBasis>(blocks_[b])) {
      // Positive slope; the intercept is free.
      c.pairs.emplace_back(-1, off + 1);
    } else if (const auto* bern = std::get_if<BernsteinBasis>(&blocks_[b])) {
      for (int k = 0; k < bern->order(); ++k)
        c.pairs.emplace_back(off + k, off + k + 1);
    } else if (const auto* tens = std::get_if<TensorBasis>(&blocks_[b])) {
      // Non-decreasing in y for every fixed covariate column: sufficient for
      // y-monotonicity of the surface because covariate basis values are a
      // partition of unity.
      const Index nx = tens->covariate_basis().dim();
      const int my = tens->response_basis().order();
      for (Index j = 0; j < nx; ++j)
        for (int k = 0; k < my; ++k)
          c.pairs.emplace_back(off + k * nx + j, off + (k + 1) * nx + j);
    } else if (const auto* vary = std::get_if<VaryingCoefBasis>(&blocks_[b])) {
      // Non-decreasing coefficients keep the block's contribution monotone
      // for every non-negative covariate value.
      for (int k = 0; k < vary->response_basis().order(); ++k)
        c.pairs.emplace_back(off + k, off + k + 1);
    }
  }
  return c;
}

}  // namespace transmod
