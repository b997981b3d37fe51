#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "transmod/data.hpp"
#include "transmod/link.hpp"
#include "transmod/model.hpp"
#include "transmod/rng.hpp"

namespace testutil {

using namespace transmod;

// Weighted-normal dataset with no covariates; the closed-form MLE is the
// oracle for the probit + linear-basis transformation model.
struct NormalOracle {
  double mu = 0.0;
  double sigma = 1.0;
  double loglik = 0.0;
};

inline Dataset normal_dataset(Index n, double mu, double sigma, std::uint64_t seed,
                              bool random_weights = false) {
  Rng rng(mix_seed(seed, 0x6e6f726dULL));
  Vector y(n), w(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = mu + sigma * rng.normal();
    w[i] = random_weights ? rng.uniform(0.5, 2.5) : 1.0;
  }
  return Dataset("y", std::move(y), {}, std::move(w), "w");
}

inline NormalOracle normal_mle(const Dataset& d) {
  const Vector& y = d.response();
  const Vector& w = d.weights();
  const double wsum = w.sum();
  NormalOracle out;
  out.mu = w.dot(y) / wsum;
  double ss = 0.0;
  for (Index i = 0; i < y.size(); ++i) ss += w[i] * (y[i] - out.mu) * (y[i] - out.mu);
  out.sigma = std::sqrt(ss / wsum);
  out.loglik = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double z = (y[i] - out.mu) / out.sigma;
    out.loglik += w[i] * (-0.5 * z * z - 0.5 * std::log(2.0 * M_PI) - std::log(out.sigma));
  }
  return out;
}

inline ModelSpec unconditional_spec(const Dataset& d, const TransformationBasis& trafo,
                                    LinkKind link) {
  ModelSpec spec;
  spec.link = Link{link};
  spec.response = d.response_name();
  spec.trafo = trafo;
  spec.strata = stratify(d, {});
  return spec;
}

// Categorical column with codes drawn by cumulative probabilities.
inline Column categorical_column(const std::string& name, std::vector<std::string> levels,
                                 const std::vector<double>& probs, Index n, Rng& rng) {
  Column col;
  col.name = name;
  col.type = ColumnType::Categorical;
  col.levels = std::move(levels);
  col.codes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double u = rng.next_double();
    double acc = 0.0;
    int code = static_cast<int>(col.levels.size()) - 1;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) {
        code = static_cast<int>(k);
        break;
      }
    }
    col.codes[static_cast<std::size_t>(i)] = code;
  }
  return col;
}

inline Column numeric_column(const std::string& name, Vector values) {
  Column col;
  col.name = name;
  col.type = ColumnType::Numeric;
  col.numeric = std::move(values);
  return col;
}

// Central finite-difference gradient of f at x.
template <typename F>
Vector fd_gradient(F&& f, const Vector& x, double eps = 1e-6) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector hi = x, lo = x;
    const double step = eps * std::max(1.0, std::abs(x[j]));
    hi[j] += step;
    lo[j] -= step;
    g[j] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

}  // namespace testutil
