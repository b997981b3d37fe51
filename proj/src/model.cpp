#include "transmod/model.hpp"

#include <algorithm>
#include <cmath>

#include "transmod/errors.hpp"
#include "transmod/parallel.hpp"

namespace transmod {

namespace {
constexpr Index kChunk = 2048;
}

std::vector<std::string> ModelSpec::param_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_params()));
  for (Index c = 0; c < n_cells(); ++c) {
    const std::string& label = strata.labels[static_cast<std::size_t>(c)];
    for (Index k = 0; k < trafo_dim(); ++k) {
      std::string name = "theta";
      if (!label.empty()) name += "[" + label + "]";
      name += "[" + std::to_string(k) + "]";
      names.push_back(std::move(name));
    }
  }
  for (Index j = 0; j < shift_dim(); ++j)
    names.push_back("beta[" + shifts.cols[static_cast<std::size_t>(j)].label + "]");
  return names;
}

MonotonicityConstraint ModelSpec::constraints() const {
  const MonotonicityConstraint block = trafo.monotonicity_rows();
  MonotonicityConstraint full;
  full.pairs.reserve(block.pairs.size() * static_cast<std::size_t>(n_cells()));
  for (Index c = 0; c < n_cells(); ++c) {
    const Index off = theta_offset(c);
    for (const auto& [minus, plus] : block.pairs)
      full.pairs.emplace_back(minus < 0 ? Index{-1} : minus + off, plus + off);
  }
  return full;
}

std::vector<std::string> ModelSpec::covariate_names() const {
  std::vector<std::string> names;
  auto add = [&](const std::string& v) {
    if (!v.empty() && std::find(names.begin(), names.end(), v) == names.end())
      names.push_back(v);
  };
  for (const std::string& v : strata.vars) add(v);
  for (const auto& col : shifts.cols) {
    for (const auto& [var, code] : col.cat_eq) add(var);
    for (const std::string& var : col.numeric_vars) add(var);
  }
  for (const std::string& v : trafo.covariates()) add(v);
  return names;
}

std::vector<Index> cells_for_dataset(const StratumIndex& s, const Dataset& d) {
  std::vector<Index> cell(static_cast<std::size_t>(d.n()), 0);
  if (s.trivial()) return cell;

  std::vector<const Column*> cols;
  cols.reserve(s.vars.size());
  for (std::size_t v = 0; v < s.vars.size(); ++v) {
    const Column& c = d.column(s.vars[v]);
    if (c.type != ColumnType::Categorical)
      throw DataError("strata variable '" + s.vars[v] + "' is numeric in this dataset");
    cols.push_back(&c);
  }

  for (Index i = 0; i < d.n(); ++i) {
    Index raw = 0;
    for (std::size_t v = 0; v < cols.size(); ++v) {
      const int code = cols[v]->codes[static_cast<std::size_t>(i)];
      if (code < 0)
        throw DataError("missing value in strata variable '" + s.vars[v] + "' at row " +
                        std::to_string(i + 1));
      const auto& train_levels = s.var_levels[v];
      // Codes are comparable only when the level list matches the training one.
      const auto& levels = cols[v]->levels;
      if (static_cast<std::size_t>(code) >= levels.size())
        throw DataError("corrupt level code in '" + s.vars[v] + "'");
      const std::string& name = levels[static_cast<std::size_t>(code)];
      auto it = std::find(train_levels.begin(), train_levels.end(), name);
      if (it == train_levels.end())
        throw RoutingError("unknown level '" + name + "' for variable '" + s.vars[v] + "'");
      raw = raw * static_cast<Index>(train_levels.size()) +
            static_cast<Index>(it - train_levels.begin());
    }
    const Index dense = s.dense_of_raw[static_cast<std::size_t>(raw)];
    if (dense < 0)
      throw SpecificationError("row " + std::to_string(i + 1) +
                               " falls in a stratum cell unoccupied in the training data");
    cell[static_cast<std::size_t>(i)] = dense;
  }
  return cell;
}

Matrix shift_matrix(const ShiftDesign& design, const Dataset& d) {
  Matrix X(d.n(), design.dim());
  for (Index j = 0; j < design.dim(); ++j) {
    const auto& spec = design.cols[static_cast<std::size_t>(j)];
    std::vector<std::pair<const Column*, int>> cats;
    for (const auto& [var, code] : spec.cat_eq) cats.emplace_back(&d.column(var), code);
    std::vector<const Column*> nums;
    for (const std::string& var : spec.numeric_vars) nums.push_back(&d.column(var));
    for (Index i = 0; i < d.n(); ++i) {
      double v = 1.0;
      for (const auto& [col, code] : cats)
        if (col->codes[static_cast<std::size_t>(i)] != code) v = 0.0;
      if (v != 0.0)
        for (const Column* col : nums) v *= col->numeric[i];
      X(i, j) = v;
    }
  }
  return X;
}

ProfileContext bind_profile(const ModelSpec& spec, const Vector& theta, const Profile& x) {
  ProfileContext ctx;
  ctx.cell = cell_for_profile(spec.strata, x);
  for (const std::string& v : spec.trafo.covariates())
    ctx.block_x.push_back(v.empty() ? 0.0 : profile_numeric(x, v));
  if (spec.shift_dim() > 0) {
    const RowVector s = encode_profile(spec.shifts, x);
    ctx.shift = s.dot(theta.segment(spec.beta_offset(), spec.shift_dim()));
  }
  return ctx;
}

double h_eval(const ModelSpec& spec, const Vector& theta, double y, const ProfileContext& ctx) {
  if (theta.size() != spec.n_params())
    throw ArgumentError("parameter vector length does not match the model layout");
  Vector a(spec.trafo_dim());
  spec.trafo.eval(y, ctx.block_x, a);
  return a.dot(theta.segment(spec.theta_offset(ctx.cell), spec.trafo_dim())) - ctx.shift;
}

double h_deriv(const ModelSpec& spec, const Vector& theta, double y, const ProfileContext& ctx) {
  if (theta.size() != spec.n_params())
    throw ArgumentError("parameter vector length does not match the model layout");
  Vector ad(spec.trafo_dim());
  spec.trafo.deriv(y, ctx.block_x, ad);
  return ad.dot(theta.segment(spec.theta_offset(ctx.cell), spec.trafo_dim()));
}

double h_eval(const ModelSpec& spec, const Vector& theta, double y, const Profile& x) {
  return h_eval(spec, theta, y, bind_profile(spec, theta, x));
}

LikelihoodProblem::LikelihoodProblem(const ModelSpec& spec, const Dataset& d) : spec_(spec) {
  w_ = d.weights();
  build(d);
}

LikelihoodProblem::LikelihoodProblem(const ModelSpec& spec, const Dataset& d,
                                     Vector weight_override)
    : spec_(spec) {
  if (weight_override.size() != d.n())
    throw ArgumentError("weight override length does not match the dataset");
  w_ = std::move(weight_override);
  build(d);
}

void LikelihoodProblem::build(const Dataset& d) {
  const Index n = d.n();
  const Index m = spec_.trafo_dim();
  y_ = d.response();
  cell_ = cells_for_dataset(spec_.strata, d);
  S_ = spec_.shift_dim() > 0 ? shift_matrix(spec_.shifts, d) : Matrix(n, 0);

  // Per-block covariate values feeding tensor / varying-coefficient terms.
  const std::vector<std::string> block_vars = spec_.trafo.covariates();
  std::vector<const Vector*> xcols(block_vars.size(), nullptr);
  for (std::size_t b = 0; b < block_vars.size(); ++b) {
    if (block_vars[b].empty()) continue;
    const Column& c = d.column(block_vars[b]);
    if (c.type != ColumnType::Numeric)
      throw SpecificationError("basis covariate '" + block_vars[b] + "' must be numeric");
    xcols[b] = &c.numeric;
  }

  A_.resize(n, m);
  Ad_.resize(n, m);
  Vector a(m), ad(m);
  std::vector<double> xvals(block_vars.size(), 0.0);
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(y_[i]))
      throw DataError("non-finite response at row " + std::to_string(i + 1));
    for (std::size_t b = 0; b < block_vars.size(); ++b)
      if (xcols[b]) xvals[b] = (*xcols[b])[i];
    spec_.trafo.eval(y_[i], xvals, a);
    spec_.trafo.deriv(y_[i], xvals, ad);
    A_.row(i) = a.transpose();
    Ad_.row(i) = ad.transpose();
  }
}

double LikelihoodProblem::loglik(const Vector& theta) const {
  Vector grad;
  return loglik_score(theta, grad);
}

double LikelihoodProblem::loglik_score(const Vector& theta, Vector& grad) const {
  if (theta.size() != n_params())
    throw ArgumentError("parameter vector length does not match the model layout");
  const Index n = this->n();
  const Index m = spec_.trafo_dim();
  const Index k = spec_.shift_dim();
  const Index boff = spec_.beta_offset();
  grad.resize(n_params());

  const Index chunks = chunk_count(n, kChunk);
  std::vector<double> part_ll(static_cast<std::size_t>(chunks), 0.0);
  std::vector<Vector> part_g(static_cast<std::size_t>(chunks));
  std::vector<char> part_bad(static_cast<std::size_t>(chunks), 0);

  parallel_chunks(n, kChunk, [&](Index ci, Index begin, Index end) {
    double ll = 0.0;
    Vector g = Vector::Zero(n_params());
    for (Index i = begin; i < end; ++i) {
      const Index off = spec_.theta_offset(cell_[static_cast<std::size_t>(i)]);
      const double hp = Ad_.row(i).dot(theta.segment(off, m));
      if (!(hp > 0.0)) {
        part_bad[static_cast<std::size_t>(ci)] = 1;
        return;
      }
      double h = A_.row(i).dot(theta.segment(off, m));
      if (k > 0) h -= S_.row(i).dot(theta.segment(boff, k));
      const double w = w_[i];
      ll += w * (spec_.link.log_pdf(h) + std::log(hp));
      const double lp = spec_.link.dlog_pdf(h);
      g.segment(off, m) += (w * lp) * A_.row(i).transpose() + (w / hp) * Ad_.row(i).transpose();
      if (k > 0) g.segment(boff, k) -= (w * lp) * S_.row(i).transpose();
    }
    part_ll[static_cast<std::size_t>(ci)] = ll;
    part_g[static_cast<std::size_t>(ci)] = std::move(g);
  });

  for (char bad : part_bad)
    if (bad)
      throw NonMonotoneError(
          "h' <= 0 at an observation: the parameter vector violates monotonicity");

  double ll = 0.0;
  grad.setZero();
  for (Index ci = 0; ci < chunks; ++ci) {
    ll += part_ll[static_cast<std::size_t>(ci)];
    grad += part_g[static_cast<std::size_t>(ci)];
  }
  return ll;
}

Vector LikelihoodProblem::score(const Vector& theta) const {
  Vector grad;
  loglik_score(theta, grad);
  return grad;
}

Matrix LikelihoodProblem::hessian(const Vector& theta) const {
  if (theta.size() != n_params())
    throw ArgumentError("parameter vector length does not match the model layout");
  const Index n = this->n();
  const Index m = spec_.trafo_dim();
  const Index k = spec_.shift_dim();
  const Index boff = spec_.beta_offset();

  const Index chunks = chunk_count(n, kChunk);
  std::vector<Matrix> part_h(static_cast<std::size_t>(chunks));
  std::vector<char> part_bad(static_cast<std::size_t>(chunks), 0);

  parallel_chunks(n, kChunk, [&](Index ci, Index begin, Index end) {
    Matrix H = Matrix::Zero(n_params(), n_params());
    for (Index i = begin; i < end; ++i) {
      const Index off = spec_.theta_offset(cell_[static_cast<std::size_t>(i)]);
      const double hp = Ad_.row(i).dot(theta.segment(off, m));
      if (!(hp > 0.0)) {
        part_bad[static_cast<std::size_t>(ci)] = 1;
        return;
      }
      double h = A_.row(i).dot(theta.segment(off, m));
      if (k > 0) h -= S_.row(i).dot(theta.segment(boff, k));
      const double w = w_[i];
      const double l2 = spec_.link.d2log_pdf(h);
      H.block(off, off, m, m) += (w * l2) * (A_.row(i).transpose() * A_.row(i)) -
                                 (w / (hp * hp)) * (Ad_.row(i).transpose() * Ad_.row(i));
      if (k > 0) {
        const Matrix cross = (w * l2) * (A_.row(i).transpose() * S_.row(i));
        H.block(off, boff, m, k) -= cross;
        H.block(boff, off, k, m) -= cross.transpose();
        H.block(boff, boff, k, k) += (w * l2) * (S_.row(i).transpose() * S_.row(i));
      }
    }
    part_h[static_cast<std::size_t>(ci)] = std::move(H);
  });

  for (char bad : part_bad)
    if (bad)
      throw NonMonotoneError(
          "h' <= 0 at an observation: the parameter vector violates monotonicity");

  Matrix H = Matrix::Zero(n_params(), n_params());
  for (Index ci = 0; ci < chunks; ++ci) H += part_h[static_cast<std::size_t>(ci)];
  return H;
}

Matrix LikelihoodProblem::score_matrix(const Vector& theta) const {
  if (theta.size() != n_params())
    throw ArgumentError("parameter vector length does not match the model layout");
  const Index n = this->n();
  const Index m = spec_.trafo_dim();
  const Index k = spec_.shift_dim();
  const Index boff = spec_.beta_offset();

  Matrix S = Matrix::Zero(n, n_params());
  std::vector<char> part_bad(static_cast<std::size_t>(chunk_count(n, kChunk)), 0);
  parallel_chunks(n, kChunk, [&](Index ci, Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Index off = spec_.theta_offset(cell_[static_cast<std::size_t>(i)]);
      const double hp = Ad_.row(i).dot(theta.segment(off, m));
      if (!(hp > 0.0)) {
        part_bad[static_cast<std::size_t>(ci)] = 1;
        return;
      }
      double h = A_.row(i).dot(theta.segment(off, m));
      if (k > 0) h -= S_.row(i).dot(theta.segment(boff, k));
      const double w = w_[i];
      const double lp = spec_.link.dlog_pdf(h);
      S.row(i).segment(off, m) = (w * lp) * A_.row(i) + (w / hp) * Ad_.row(i);
      if (k > 0) S.row(i).segment(boff, k) = -(w * lp) * S_.row(i);
    }
  });
  for (char bad : part_bad)
    if (bad)
      throw NonMonotoneError(
          "h' <= 0 at an observation: the parameter vector violates monotonicity");
  return S;
}

}  // namespace transmod
