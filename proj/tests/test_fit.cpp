#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "transmod/errors.hpp"
#include "transmod/fit.hpp"
#include "transmod/rng.hpp"

using namespace transmod;
using testutil::fd_gradient;
using testutil::normal_dataset;
using testutil::normal_mle;
using testutil::unconditional_spec;

namespace {

TransformationBasis linear_basis() {
  return TransformationBasis({BasisBlock(LinearBasis{})});
}

TransformationBasis bernstein_basis(int order, double lo, double hi) {
  return TransformationBasis({BasisBlock(BernsteinBasis(order, Support(lo, hi)))});
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("probit + linear transformation recovers the weighted normal MLE") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Dataset d = normal_dataset(400, 23.5, 3.2, seed, /*random_weights=*/true);
    auto oracle = normal_mle(d);
    FittedModel fm = mle(unconditional_spec(d, linear_basis(), LinkKind::Probit), d);
    CHECK(fm.report.converged);
    // h(y) = t0 + t1 y maps to mu = -t0/t1, sigma = 1/t1.
    const double mu_hat = -fm.theta[0] / fm.theta[1];
    const double sigma_hat = 1.0 / fm.theta[1];
    CHECK(mu_hat == doctest::Approx(oracle.mu).epsilon(1e-7));
    CHECK(sigma_hat == doctest::Approx(oracle.sigma).epsilon(1e-7));
    CHECK(fm.loglik == doctest::Approx(oracle.loglik).epsilon(1e-9));
  }
}

TEST_CASE("working map is a smooth bijection onto the feasible set") {
  BernsteinBasis bb(4, Support(0, 1));
  TransformationBasis trafo({BasisBlock(bb)});
  MonotonicityConstraint c = trafo.monotonicity_rows();
  WorkingMap map(c, trafo.dim());

  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    Vector omega(map.dim());
    for (Index k = 0; k < omega.size(); ++k) omega[k] = rng.uniform(-4.0, 4.0);
    Vector theta = map.to_theta(omega);
    // Always strictly feasible.
    for (Index k = 1; k < theta.size(); ++k) CHECK(theta[k] > theta[k - 1]);
    // Round trip.
    Vector back = map.from_theta(theta);
    CHECK((back - omega).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("working-map gradient pull matches finite differences") {
  Dataset d = normal_dataset(80, 5.0, 1.5, 4);
  ModelSpec spec = unconditional_spec(d, bernstein_basis(4, 0.0, 10.0), LinkKind::Logit);
  LikelihoodProblem prob(spec, d);
  WorkingMap map(spec.constraints(), spec.n_params());

  Vector omega = Vector::Constant(map.dim(), 0.3);
  omega[0] = -2.0;
  auto f = [&](const Vector& om) { return prob.loglik(map.to_theta(om)); };
  Vector fd = fd_gradient(f, omega, 1e-6);

  Vector theta = map.to_theta(omega);
  Vector grad_theta = prob.score(theta);
  Vector an = map.pull_gradient(omega, grad_theta);
  for (Index k = 0; k < an.size(); ++k)
    CHECK(an[k] == doctest::Approx(fd[k]).epsilon(1e-5).scale(1.0));

  Matrix J = map.jacobian(omega);
  CHECK(((J.transpose() * grad_theta) - an).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("working-map hessian pull matches finite differences of the pulled gradient") {
  Dataset d = normal_dataset(60, 0.0, 1.0, 5);
  ModelSpec spec = unconditional_spec(d, bernstein_basis(3, -4.0, 4.0), LinkKind::Probit);
  LikelihoodProblem prob(spec, d);
  WorkingMap map(spec.constraints(), spec.n_params());

  Vector omega = Vector::Constant(map.dim(), 0.2);
  Vector theta = map.to_theta(omega);
  Matrix H = map.pull_hessian(omega, prob.hessian(theta), prob.score(theta));
  CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  const double eps = 1e-6;
  for (Index j = 0; j < omega.size(); ++j) {
    Vector hi = omega, lo = omega;
    hi[j] += eps;
    lo[j] -= eps;
    Vector ghi = map.pull_gradient(hi, prob.score(map.to_theta(hi)));
    Vector glo = map.pull_gradient(lo, prob.score(map.to_theta(lo)));
    Vector col = (ghi - glo) / (2 * eps);
    for (Index i = 0; i < omega.size(); ++i)
      CHECK(H(i, j) == doctest::Approx(col[i]).epsilon(5e-4).scale(1.0));
  }
}

TEST_CASE("start values are strictly feasible and finite") {
  Dataset d = normal_dataset(200, 30.0, 6.0, 6, /*random_weights=*/true);
  ModelSpec spec = unconditional_spec(d, bernstein_basis(6, 10.0, 50.0), LinkKind::Logit);
  LikelihoodProblem prob(spec, d);
  Vector t0 = start_values(prob, FitOptions{});
  REQUIRE(t0.size() == spec.n_params());
  for (Index k = 1; k < t0.size(); ++k) CHECK(t0[k] > t0[k - 1]);
  CHECK(std::isfinite(prob.loglik(t0)));
}

TEST_CASE("mle gradient is stationary and vcov is the inverse observed information") {
  Dataset d = normal_dataset(300, 12.0, 2.0, 7);
  ModelSpec spec = unconditional_spec(d, bernstein_basis(5, 4.0, 20.0), LinkKind::Probit);
  FittedModel fm = mle(spec, d);
  CHECK(fm.report.converged);
  CHECK(fm.report.grad_norm <= 1e-8);

  LikelihoodProblem prob(spec, d);
  if (fm.report.active_constraints.empty()) {
    Matrix H = prob.hessian(fm.theta);
    Matrix prod = fm.vcov * (-H);
    CHECK((prod - Matrix::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(fm.n_obs == 300);
  CHECK(fm.weight_sum == doctest::Approx(300.0));
}

TEST_CASE("mle_weighted overrides the dataset weights") {
  Dataset d = normal_dataset(150, 3.0, 1.0, 8);
  ModelSpec spec = unconditional_spec(d, linear_basis(), LinkKind::Probit);
  Rng rng(42);
  Vector w(150);
  for (Index i = 0; i < 150; ++i) w[i] = rng.uniform(0.2, 3.0);
  FittedModel fm = mle_weighted(spec, d, w, FitOptions{});

  Dataset dw("y", d.response(), {}, w, "w");
  auto oracle = normal_mle(dw);
  CHECK(-fm.theta[0] / fm.theta[1] == doctest::Approx(oracle.mu).epsilon(1e-7));
  CHECK(fm.loglik == doctest::Approx(oracle.loglik).epsilon(1e-9));
  CHECK(fm.weight_sum == doctest::Approx(w.sum()));
}

TEST_CASE("confint rows cover the truth structure and respect the level") {
  Dataset d = normal_dataset(500, 10.0, 2.0, 9);
  ModelSpec spec = unconditional_spec(d, linear_basis(), LinkKind::Probit);
  FittedModel fm = mle(spec, d);
  auto rows95 = confint(fm, 0.95);
  auto rows80 = confint(fm, 0.80);
  REQUIRE(rows95.size() == 2);
  for (std::size_t k = 0; k < rows95.size(); ++k) {
    CHECK(rows95[k].lower < rows95[k].estimate);
    CHECK(rows95[k].estimate < rows95[k].upper);
    // Narrower level is nested inside.
    CHECK(rows80[k].lower > rows95[k].lower);
    CHECK(rows80[k].upper < rows95[k].upper);
    CHECK(rows95[k].name == fm.param_names[k]);
    CHECK_FALSE(rows95[k].shift_param);
    // Wald width equals 2 z se.
    const double z = 1.959963985;
    CHECK(rows95[k].upper - rows95[k].lower ==
          doctest::Approx(2.0 * z * rows95[k].se).epsilon(1e-6));
  }
  CHECK_THROWS_AS(confint(fm, 1.0), ArgumentError);
}

TEST_CASE("odds-ratio formatting") {
  CHECK(format_or(0.174353, 0.0493, 0.95) == "1.19 (1.08-1.31)");
  CHECK(format_or(0.0, 0.1, 0.95) == "1.00 (0.82-1.22)");
}

TEST_CASE("lr_compare reports the likelihood difference and parameter counts") {
  Dataset d = normal_dataset(250, 0.0, 1.0, 10);
  FittedModel small =
      mle(unconditional_spec(d, linear_basis(), LinkKind::Probit), d);
  FittedModel big =
      mle(unconditional_spec(d, bernstein_basis(6, -4.0, 4.0), LinkKind::Probit), d);
  LrComparison lr = lr_compare(big, small);
  CHECK(lr.params_a == 7);
  CHECK(lr.params_b == 2);
  CHECK(lr.difference == doctest::Approx(big.loglik - small.loglik));
  // Larger nested-style family cannot do worse (up to optimizer slack).
  CHECK(lr.difference >= -1e-6);

  Dataset other = normal_dataset(250, 0.0, 1.0, 11);
  FittedModel fo = mle(unconditional_spec(other, linear_basis(), LinkKind::Probit), other);
  CHECK_THROWS_AS(lr_compare(big, fo), ArgumentError);
}

TEST_CASE("likelihood never decreases as the basis order grows") {
  Dataset d = normal_dataset(350, 24.0, 4.0, 12, /*random_weights=*/true);
  double prev = -1e300;
  for (int order : {1, 3, 5, 10}) {
    FittedModel fm =
        mle(unconditional_spec(d, bernstein_basis(order, 8.0, 40.0), LinkKind::Logit), d);
    CHECK(fm.loglik >= prev - 1e-6);
    prev = fm.loglik;
  }
}

TEST_CASE("active constraints are flagged when the data force a flat step") {
  // Two-point response forces intermediate Bernstein increments to zero.
  Vector y(60), w = Vector::Ones(60);
  for (Index i = 0; i < 60; ++i) y[i] = (i % 2 == 0) ? 1.0 : 9.0;
  Dataset d("y", y, {}, w, "w");
  ModelSpec spec = unconditional_spec(d, bernstein_basis(4, 0.0, 10.0), LinkKind::Probit);
  FittedModel fm = mle(spec, d);
  CHECK_FALSE(fm.report.active_constraints.empty());
  auto rows = confint(fm, 0.95);
  bool any_boundary = false;
  for (const auto& r : rows) any_boundary = any_boundary || r.boundary;
  CHECK(any_boundary);
}

TEST_CASE("fit options are validated") {
  FitOptions bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  FitOptions bad2;
  bad2.grad_tol = -1.0;
  CHECK_THROWS_AS(bad2.validate(), ArgumentError);
}

}  // TEST_SUITE
