#pragma once

#include <string>
#include <vector>

#include "transmod/fit.hpp"

namespace transmod {

// A fitted model bound to one covariate profile; all distribution
// functionals evaluate through this.
class ProfileCurve {
 public:
  ProfileCurve(const FittedModel& fm, const Profile& x);

  double h(double y) const;
  double h_deriv(double y) const;
  double cdf(double y) const { return fm_->spec.link.cdf(h(y)); }
  // Survival computed as F(-h); exact because both links are symmetric.
  double survival(double y) const { return fm_->spec.link.cdf(-h(y)); }
  double density(double y) const;
  // Monotone root finding for F(h(y)) = p: geometric bracket expansion
  // beyond the support, then bisection to 1e-10 in h-space.
  double quantile(double p) const;

  const FittedModel& model() const { return *fm_; }

 private:
  const FittedModel* fm_;
  ProfileContext ctx_;
  Support support_;
};

double cdf(const FittedModel& fm, double y, const Profile& x);
double density(const FittedModel& fm, double y, const Profile& x);
double quantile(const FittedModel& fm, double p, const Profile& x);

// Ratio-style functionals overflow once the CDF is numerically 1; the flag
// marks a +infinity result.
struct RatioResult {
  double value = 0.0;
  bool overflow = false;
};

RatioResult odds(const FittedModel& fm, double y, const Profile& x);
RatioResult hazard(const FittedModel& fm, double y, const Profile& x);
RatioResult cum_hazard(const FittedModel& fm, double y, const Profile& x);

// Long-format curve data; written as CSV with exactly these four columns.
struct CurveTable {
  struct Row {
    std::string profile;
    std::string functional;
    double grid = 0.0;
    double value = 0.0;
  };
  std::vector<Row> rows;
};

void write_curve_csv(const CurveTable& table, const std::string& path,
                     const std::string& manifest_comment);

struct GridRequest {
  Vector grid;                // explicit strictly increasing y-grid; else
  Index count = 101;          // grid points over the response support
  std::vector<double> probs;  // optional quantile levels per profile
  std::vector<Profile> profiles;
  std::vector<std::string> profile_labels;  // optional, defaults to p0, p1, ...
};

struct DistributionCurves {
  Vector grid;
  // Per profile: cdf and density along the grid, quantiles at request.probs.
  struct ProfileResult {
    std::string label;
    Vector cdf;
    Vector density;
    Vector quantiles;
  };
  std::vector<ProfileResult> profiles;

  CurveTable table() const;
};

DistributionCurves distribution_curves(const FittedModel& fm, const GridRequest& request);

// Decile curves of the response against one numeric covariate: quantiles at
// p = 0.1..0.9 for every profile and grid value of the covariate.
CurveTable decile_curves(const FittedModel& fm, const std::string& numeric_var,
                         const std::vector<Profile>& profiles,
                         const std::vector<std::string>& profile_labels,
                         const Vector& var_grid);

// Weighted empirical CDF against the model CDF per stratum cell, plus the
// per-cell sup-distance between the two.
struct OverlayResult {
  CurveTable table;  // functionals "ecdf" and "cdf" per cell label
  std::vector<std::pair<std::string, double>> sup_distance;
  std::vector<std::string> warnings;  // skipped cells
};

OverlayResult ecdf_overlay(const FittedModel& fm, const Dataset& d,
                           const std::vector<std::string>& strata_vars);

// Response support declared by the transformation basis.
Support response_support(const TransformationBasis& trafo);

}  // namespace transmod
