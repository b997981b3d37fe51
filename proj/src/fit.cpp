#include "transmod/fit.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "transmod/errors.hpp"
#include "transmod/hash.hpp"
#include "transmod/link.hpp"
#include "transmod/text.hpp"

namespace transmod {

namespace {

double softplus(double x) { return log1pexp(x); }
double softplus_d1(double x) { return expit(x); }
double softplus_d2(double x) {
  const double e = expit(x);
  return e * (1.0 - e);
}
// Inverse of softplus for delta > 0; for large delta the two agree.
double softplus_inv(double delta) { return delta > 30.0 ? delta : std::log(std::expm1(delta)); }

}  // namespace

void FitOptions::validate() const {
  if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
  if (max_polish < 1) throw ArgumentError("max_polish must be >= 1");
  if (!(grad_tol > 0.0) || !(eps_mono > 0.0) || !(start_floor > 0.0))
    throw ArgumentError("fit tolerances must be positive");
}

WorkingMap::WorkingMap(MonotonicityConstraint constraint, Index dim)
    : constraint_(std::move(constraint)), dim_(dim), base_(static_cast<std::size_t>(dim), -2) {
  for (const auto& [minus, plus] : constraint_.pairs) {
    if (plus < 0 || plus >= dim_ || minus >= plus || minus < -1)
      throw ArgumentError("malformed monotonicity constraint pair");
    if (base_[static_cast<std::size_t>(plus)] != -2)
      throw ArgumentError("parameter " + std::to_string(plus) + " constrained twice");
    base_[static_cast<std::size_t>(plus)] = minus;
  }
}

Vector WorkingMap::to_theta(const Vector& omega) const {
  Vector theta(dim_);
  for (Index j = 0; j < dim_; ++j) {
    const Index b = base_[static_cast<std::size_t>(j)];
    if (b == -2)
      theta[j] = omega[j];
    else if (b == -1)
      theta[j] = softplus(omega[j]);
    else
      theta[j] = theta[b] + softplus(omega[j]);
  }
  return theta;
}

Vector WorkingMap::from_theta(const Vector& theta) const {
  Vector omega(dim_);
  for (Index j = 0; j < dim_; ++j) {
    const Index b = base_[static_cast<std::size_t>(j)];
    if (b == -2) {
      omega[j] = theta[j];
      continue;
    }
    const double delta = theta[j] - (b >= 0 ? theta[b] : 0.0);
    if (!(delta > 0.0))
      throw NonMonotoneError("parameter vector is not strictly feasible at index " +
                             std::to_string(j));
    omega[j] = softplus_inv(delta);
  }
  return omega;
}

Vector WorkingMap::pull_gradient(const Vector& omega, const Vector& grad_theta,
                                 Vector* adjoint) const {
  Vector acc = grad_theta;
  Vector out(dim_);
  for (Index j = dim_ - 1; j >= 0; --j) {
    const Index b = base_[static_cast<std::size_t>(j)];
    if (b == -2) {
      out[j] = acc[j];
    } else {
      if (b >= 0) acc[b] += acc[j];
      out[j] = acc[j] * softplus_d1(omega[j]);
    }
  }
  if (adjoint) *adjoint = std::move(acc);
  return out;
}

Matrix WorkingMap::jacobian(const Vector& omega) const {
  Matrix J(dim_, dim_);
  for (Index j = 0; j < dim_; ++j) {
    const Index b = base_[static_cast<std::size_t>(j)];
    if (b >= 0)
      J.row(j) = J.row(b);
    else
      J.row(j).setZero();
    J(j, j) = b == -2 ? 1.0 : softplus_d1(omega[j]);
  }
  return J;
}

Matrix WorkingMap::pull_hessian(const Vector& omega, const Matrix& hess_theta,
                                const Vector& grad_theta) const {
  const Matrix J = jacobian(omega);
  Vector adjoint;
  pull_gradient(omega, grad_theta, &adjoint);
  Matrix H = J.transpose() * hess_theta * J;
  for (Index j = 0; j < dim_; ++j)
    if (base_[static_cast<std::size_t>(j)] != -2)
      H(j, j) += adjoint[j] * softplus_d2(omega[j]);
  return H;
}

std::vector<Index> WorkingMap::active_set(const Vector& theta, double eps) const {
  std::vector<Index> active;
  for (std::size_t r = 0; r < constraint_.pairs.size(); ++r) {
    const auto& [minus, plus] = constraint_.pairs[r];
    const double delta = theta[plus] - (minus >= 0 ? theta[minus] : 0.0);
    if (delta <= eps) active.push_back(static_cast<Index>(r));
  }
  return active;
}

namespace {

// Midpoint weighted ECDF value per observation, ties shared.
Vector midpoint_ecdf(const Vector& y, const Vector& w, const std::vector<Index>& rows) {
  std::vector<Index> order(rows);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return y[a] < y[b]; });
  double total = 0.0;
  for (Index i : order) total += w[i];

  Vector g(y.size());
  double cum = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t e = k;
    double tied = 0.0;
    while (e < order.size() && y[order[e]] == y[order[k]]) tied += w[order[e++]];
    const double mid = (cum + 0.5 * tied) / total;
    for (std::size_t j = k; j < e; ++j) g[order[j]] = mid;
    cum += tied;
    k = e;
  }
  return g;
}

void repair_block(Vector& v, const MonotonicityConstraint& block, double floor_delta) {
  for (const auto& [minus, plus] : block.pairs) {
    const double base = minus >= 0 ? v[minus] : 0.0;
    if (v[plus] < base + floor_delta) v[plus] = base + floor_delta;
  }
}

std::uint64_t dataset_fingerprint(const LikelihoodProblem& prob) {
  std::uint64_t h = fnv1a64(prob.response().data(),
                            static_cast<std::size_t>(prob.response().size()) * sizeof(double));
  return fnv1a64(prob.weights().data(),
                 static_cast<std::size_t>(prob.weights().size()) * sizeof(double), h);
}

}  // namespace

Vector start_values(const LikelihoodProblem& prob, const FitOptions& opts) {
  const ModelSpec& spec = prob.spec();
  const Index m = spec.trafo_dim();
  const MonotonicityConstraint block = spec.trafo.monotonicity_rows();
  Vector theta = Vector::Zero(spec.n_params());

  for (Index c = 0; c < spec.n_cells(); ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < prob.n(); ++i)
      if (prob.cells()[static_cast<std::size_t>(i)] == c && prob.weights()[i] > 0.0)
        rows.push_back(i);
    if (rows.empty())
      throw SpecificationError("stratum cell '" +
                               spec.strata.labels[static_cast<std::size_t>(c)] +
                               "' has no weighted observations");

    const Vector g = midpoint_ecdf(prob.response(), prob.weights(), rows);
    Matrix M = Matrix::Zero(m, m);
    Vector b = Vector::Zero(m);
    for (Index i : rows) {
      const double z = spec.link.quantile(std::clamp(g[i], 0.005, 0.995));
      const double w = prob.weights()[i];
      M.noalias() += w * (prob.basis().row(i).transpose() * prob.basis().row(i));
      b.noalias() += (w * z) * prob.basis().row(i).transpose();
    }
    const double ridge = 1e-6 * (M.trace() / static_cast<double>(m)) + 1e-12;
    M.diagonal().array() += ridge;
    Vector v = M.ldlt().solve(b);
    repair_block(v, block, opts.start_floor);
    theta.segment(spec.theta_offset(c), m) = v;
  }
  return theta;
}

namespace {

struct Objective {
  const LikelihoodProblem& prob;
  const WorkingMap& map;

  double eval(const Vector& omega, Vector& grad_omega) const {
    const Vector theta = map.to_theta(omega);
    Vector grad_theta;
    const double ll = prob.loglik_score(theta, grad_theta);
    grad_omega = map.pull_gradient(omega, grad_theta);
    return ll;
  }
};

constexpr double kArmijo = 1e-4;

// Backtracking line search on the log-likelihood; returns accepted ll or NaN.
double line_search(const Objective& obj, const Vector& omega, double ll, const Vector& grad,
                   const Vector& dir, Vector& omega_out, Vector& grad_out, double& ll_out) {
  const double slope = grad.dot(dir);
  double alpha = 1.0;
  for (int k = 0; k < 60; ++k, alpha *= 0.5) {
    const Vector cand = omega + alpha * dir;
    Vector g;
    double ll_new;
    try {
      ll_new = obj.eval(cand, g);
    } catch (const NumericError&) {
      continue;  // overflow in an extreme trial step; shrink
    }
    if (!std::isfinite(ll_new)) continue;
    if (ll_new >= ll + kArmijo * alpha * slope) {
      omega_out = cand;
      grad_out = std::move(g);
      ll_out = ll_new;
      return alpha;
    }
  }
  return -1.0;
}

}  // namespace

FittedModel mle_problem(const LikelihoodProblem& prob, const FitOptions& opts) {
  opts.validate();
  const ModelSpec& spec = prob.spec();
  const Index p = spec.n_params();
  const double n_scale = static_cast<double>(prob.n());

  Index weighted = 0;
  for (Index i = 0; i < prob.n(); ++i)
    if (prob.weights()[i] > 0.0) ++weighted;
  if (weighted < p)
    throw SpecificationError("need at least " + std::to_string(p) +
                             " weighted observations, got " + std::to_string(weighted));
  for (Index c = 0; c < spec.n_cells(); ++c) {
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    for (Index i = 0; i < prob.n(); ++i) {
      if (prob.cells()[static_cast<std::size_t>(i)] != c || !(prob.weights()[i] > 0.0)) continue;
      const double y = prob.response()[i];
      if (!seen) {
        lo = hi = y;
        seen = true;
      } else {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    if (!seen)
      throw SpecificationError("stratum cell '" +
                               spec.strata.labels[static_cast<std::size_t>(c)] +
                               "' has no weighted observations");
    if (lo == hi)
      throw SpecificationError("stratum cell '" +
                               spec.strata.labels[static_cast<std::size_t>(c)] +
                               "' has a single distinct response value");
  }

  const WorkingMap map(spec.constraints(), p);
  const Objective obj{prob, map};

  Vector omega = map.from_theta(start_values(prob, opts));
  Vector grad;
  double ll = obj.eval(omega, grad);
  std::vector<double> trajectory{ll};

  auto gmax = [&](const Vector& g) { return g.cwiseAbs().maxCoeff() / n_scale; };
  bool converged = gmax(grad) <= opts.grad_tol;
  int iterations = 0;
  int stalls = 0;

  // Quasi-Newton stage: BFGS on the working parameters.
  Matrix hinv = Matrix::Identity(p, p);
  while (!converged && iterations < opts.max_iterations && stalls < 3) {
    Vector dir = hinv * grad;
    if (dir.dot(grad) <= 0.0) {
      hinv.setIdentity();
      dir = grad;
    }
    Vector omega_new, grad_new;
    double ll_new;
    if (line_search(obj, omega, ll, grad, dir, omega_new, grad_new, ll_new) < 0.0) break;

    const Vector s = omega_new - omega;
    const Vector yphi = grad - grad_new;  // gradient change of the negated objective
    const double sy = s.dot(yphi);
    if (sy > 1e-12 * s.norm() * yphi.norm()) {
      const double rho = 1.0 / sy;
      const Vector hy = hinv * yphi;
      hinv.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      hinv.noalias() += (rho * rho * (yphi.dot(hy)) + rho) * (s * s.transpose());
    }
    stalls = ll_new - ll <= 1e-14 * (std::abs(ll) + 1.0) ? stalls + 1 : 0;
    omega = std::move(omega_new);
    grad = std::move(grad_new);
    ll = ll_new;
    trajectory.push_back(ll);
    ++iterations;
    converged = gmax(grad) <= opts.grad_tol;
  }

  // Damped-Newton polish with the analytic Hessian. The damping ridge
  // persists across iterations and decays after every accepted step, so
  // ill-conditioned fits creep with the largest stable step while
  // well-conditioned ones take undamped Newton steps throughout.
  double damping = 0.0;
  for (int k = 0; k < opts.max_polish && !converged; ++k) {
    const Vector theta = map.to_theta(omega);
    Vector grad_theta;
    prob.loglik_score(theta, grad_theta);
    const Matrix hw = map.pull_hessian(omega, prob.hessian(theta), grad_theta);
    Matrix neg = -hw;
    const double scale = neg.diagonal().cwiseAbs().maxCoeff() + 1e-12;

    Vector dir;
    double ridge = damping;
    for (int attempt = 0; attempt < 24; ++attempt) {
      Matrix damped = neg;
      damped.diagonal().array() += ridge;
      Eigen::LDLT<Matrix> ldlt(damped);
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(grad);
        if (dir.dot(grad) > 0.0) break;
      }
      dir.resize(0);
      ridge = ridge == 0.0 ? 1e-10 * scale : ridge * 10.0;
    }
    if (dir.size() == 0) break;

    Vector omega_new, grad_new;
    double ll_new;
    if (line_search(obj, omega, ll, grad, dir, omega_new, grad_new, ll_new) < 0.0) break;
    damping = ridge * 0.1;
    if (damping < 1e-10 * scale) damping = 0.0;
    omega = std::move(omega_new);
    grad = std::move(grad_new);
    ll = ll_new;
    trajectory.push_back(ll);
    ++iterations;
    converged = gmax(grad) <= opts.grad_tol;
  }

  // Double precision can leave the gradient criterion narrowly unmet while
  // the likelihood is numerically stationary: accept when the last steps
  // gained nothing and the gradient sits within a small band of the target.
  if (!converged && gmax(grad) <= 100.0 * opts.grad_tol && trajectory.size() >= 2) {
    const std::size_t from = trajectory.size() > 4 ? trajectory.size() - 4 : 0;
    double gain = 0.0;
    for (std::size_t i = from + 1; i < trajectory.size(); ++i)
      gain = std::max(gain, trajectory[i] - trajectory[i - 1]);
    if (gain <= 1e-12 * (std::abs(ll) + 1.0)) converged = true;
  }

  if (!converged) {
    std::string tail;
    const std::size_t from = trajectory.size() > 5 ? trajectory.size() - 5 : 0;
    for (std::size_t i = from; i < trajectory.size(); ++i)
      tail += (tail.empty() ? "" : ", ") + format_double(trajectory[i]);
    throw NumericError("no convergence after " + std::to_string(iterations) +
                       " iterations; max|gradient|/n = " + format_double(gmax(grad)) +
                       "; recent log-likelihoods: " + tail);
  }

  FittedModel fm;
  fm.spec = spec;
  fm.theta = map.to_theta(omega);
  fm.loglik = ll;
  fm.param_names = spec.param_names();
  fm.n_obs = prob.n();
  fm.weight_sum = prob.weights().sum();
  fm.data_hash = dataset_fingerprint(prob);
  fm.report.iterations = iterations;
  fm.report.grad_norm = gmax(grad);
  fm.report.converged = true;
  fm.report.active_constraints = map.active_set(fm.theta, opts.eps_mono);

  Vector grad_theta;
  prob.loglik_score(fm.theta, grad_theta);
  const Matrix hw = map.pull_hessian(omega, prob.hessian(fm.theta), grad_theta);
  Matrix neg = -hw;
  neg.diagonal().array() += 1e-12 * (neg.diagonal().cwiseAbs().maxCoeff() + 1.0);
  const Matrix J = map.jacobian(omega);
  const Matrix x = neg.ldlt().solve(J.transpose());
  fm.vcov = J * x;
  fm.vcov = 0.5 * (fm.vcov + fm.vcov.transpose()).eval();
  return fm;
}

FittedModel mle(const ModelSpec& spec, const Dataset& d, const FitOptions& opts) {
  const LikelihoodProblem prob(spec, d);
  return mle_problem(prob, opts);
}

FittedModel mle_weighted(const ModelSpec& spec, const Dataset& d, Vector weights,
                         const FitOptions& opts) {
  const LikelihoodProblem prob(spec, d, std::move(weights));
  return mle_problem(prob, opts);
}

std::vector<IntervalRow> confint(const FittedModel& fm, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ArgumentError("confidence level must lie in (0,1)");
  const double z = normal_quantile(0.5 + level / 2.0);

  std::vector<char> boundary(static_cast<std::size_t>(fm.spec.n_params()), 0);
  const auto pairs = fm.spec.constraints().pairs;
  for (Index r : fm.report.active_constraints)
    boundary[static_cast<std::size_t>(pairs[static_cast<std::size_t>(r)].second)] = 1;

  std::vector<IntervalRow> rows;
  rows.reserve(static_cast<std::size_t>(fm.spec.n_params()));
  for (Index j = 0; j < fm.spec.n_params(); ++j) {
    IntervalRow row;
    row.name = fm.param_names[static_cast<std::size_t>(j)];
    row.estimate = fm.theta[j];
    row.se = std::sqrt(std::max(fm.vcov(j, j), 0.0));
    row.lower = row.estimate - z * row.se;
    row.upper = row.estimate + z * row.se;
    row.shift_param = j >= fm.spec.beta_offset();
    row.boundary = boundary[static_cast<std::size_t>(j)] != 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_or(double estimate, double se, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ArgumentError("confidence level must lie in (0,1)");
  const double z = normal_quantile(0.5 + level / 2.0);
  return format_fixed(std::exp(estimate), 2) + " (" +
         format_fixed(std::exp(estimate - z * se), 2) + "-" +
         format_fixed(std::exp(estimate + z * se), 2) + ")";
}

LrComparison lr_compare(const FittedModel& a, const FittedModel& b) {
  if (a.spec.response != b.spec.response)
    throw ArgumentError("models have different responses ('" + a.spec.response + "' vs '" +
                        b.spec.response + "')");
  if (a.n_obs != b.n_obs || a.data_hash != b.data_hash)
    throw ArgumentError("models were fitted on different datasets");
  LrComparison cmp;
  cmp.loglik_a = a.loglik;
  cmp.loglik_b = b.loglik;
  cmp.difference = a.loglik - b.loglik;
  cmp.params_a = a.spec.n_params();
  cmp.params_b = b.spec.n_params();
  return cmp;
}

}  // namespace transmod
