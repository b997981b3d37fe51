#pragma once

#include <cstdint>

#include "transmod/basis.hpp"
#include "transmod/data.hpp"

namespace transmod {

struct SimulateOptions {
  Index n = 1000;
  std::uint64_t seed = 1;
  // Scales every covariate effect (smoking, lifestyle, age trend, age bump);
  // 0 leaves only the sex-specific baselines.
  double effect_scale = 1.0;
  bool random_weights = false;  // default: all weights 1

  void validate() const;
};

// Synthetic health-survey generator: a stratified logit transformation
// model with sex-specific monotone Bernstein baselines, smoking and
// lifestyle shift effects, a linear age trend and a localized BMI bump for
// women around age 30. The bump depends on (sex, age) only, so it lives in
// the span of a sex-stratified tensor basis in (bmi, age).
class ShsGenerator {
 public:
  explicit ShsGenerator(double effect_scale = 1.0);

  Dataset sample(Index n, std::uint64_t seed, bool random_weights = false) const;

  // Shift applied on the transformation scale; positive values move the
  // response distribution upward.
  double shift(const Profile& row) const;

  // P(bmi <= y | covariates), the exact generator truth.
  double conditional_cdf(double y, const Profile& row) const;

  // Sex mixture of the baseline distributions. Equals the data marginal
  // only when effect_scale is 0.
  double marginal_cdf(double y) const;

  const BernsteinBasis& baseline_basis() const { return basis_; }
  double effect_scale() const { return scale_; }

 private:
  double baseline_h(double y, bool male) const;
  double sample_bmi(double shift_value, bool male, double u) const;

  double scale_;
  BernsteinBasis basis_;
  Vector theta_female_;
  Vector theta_male_;
};

Dataset simulate_shs(const SimulateOptions& opt);

}  // namespace transmod
