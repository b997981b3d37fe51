#include "transmod/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "transmod/errors.hpp"
#include "transmod/text.hpp"

namespace transmod {

Support response_support(const TransformationBasis& trafo) {
  const BasisBlock& first = trafo.blocks().front();
  if (const auto* lin = std::get_if<LinearBasis>(&first)) return lin->support();
  if (const auto* bern = std::get_if<BernsteinBasis>(&first)) return bern->support();
  if (const auto* tens = std::get_if<TensorBasis>(&first)) return tens->response_basis().support();
  return std::get<VaryingCoefBasis>(first).response_basis().support();
}

ProfileCurve::ProfileCurve(const FittedModel& fm, const Profile& x)
    : fm_(&fm), ctx_(bind_profile(fm.spec, fm.theta, x)),
      support_(response_support(fm.spec.trafo)) {}

double ProfileCurve::h(double y) const { return h_eval(fm_->spec, fm_->theta, y, ctx_); }

double ProfileCurve::h_deriv(double y) const {
  return transmod::h_deriv(fm_->spec, fm_->theta, y, ctx_);
}

double ProfileCurve::density(double y) const {
  return fm_->spec.link.pdf(h(y)) * h_deriv(y);
}

double ProfileCurve::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0,1)");
  const double z = fm_->spec.link.quantile(p);

  double lo = support_.lower, hi = support_.upper;
  double step = support_.width();
  for (int k = 0; h(lo) > z; ++k) {
    if (k >= 200) throw NumericError("quantile bracketing failed on the left");
    lo -= step;
    step *= 2.0;
  }
  step = support_.width();
  for (int k = 0; h(hi) < z; ++k) {
    if (k >= 200) throw NumericError("quantile bracketing failed on the right");
    hi += step;
    step *= 2.0;
  }

  const double eps_y = 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)});
  double mid = 0.5 * (lo + hi);
  for (int k = 0; k < 200; ++k) {
    mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if (std::abs(hm - z) <= 1e-10 || hi - lo <= eps_y) break;
    if (hm < z)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

double cdf(const FittedModel& fm, double y, const Profile& x) {
  return ProfileCurve(fm, x).cdf(y);
}

double density(const FittedModel& fm, double y, const Profile& x) {
  return ProfileCurve(fm, x).density(y);
}

double quantile(const FittedModel& fm, double p, const Profile& x) {
  return ProfileCurve(fm, x).quantile(p);
}

RatioResult odds(const FittedModel& fm, double y, const Profile& x) {
  const ProfileCurve curve(fm, x);
  const double s = curve.survival(y);
  if (s <= 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {curve.cdf(y) / s, false};
}

RatioResult hazard(const FittedModel& fm, double y, const Profile& x) {
  const ProfileCurve curve(fm, x);
  const double s = curve.survival(y);
  if (s <= 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {curve.density(y) / s, false};
}

RatioResult cum_hazard(const FittedModel& fm, double y, const Profile& x) {
  const ProfileCurve curve(fm, x);
  const double s = curve.survival(y);
  if (s <= 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {-std::log(s), false};
}

void write_curve_csv(const CurveTable& table, const std::string& path,
                     const std::string& manifest_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  if (!manifest_comment.empty()) out << manifest_comment << "\n";
  out << "profile,functional,grid,value\n";
  for (const auto& row : table.rows)
    out << row.profile << "," << row.functional << "," << format_double(row.grid) << ","
        << format_double(row.value) << "\n";
  if (!out) throw DataError("failed writing '" + path + "'");
}

namespace {

Vector grid_or_default(const GridRequest& request, const FittedModel& fm) {
  if (request.grid.size() > 0) {
    for (Index i = 1; i < request.grid.size(); ++i)
      if (!(request.grid[i] > request.grid[i - 1]))
        throw ArgumentError("grid must be strictly increasing");
    return request.grid;
  }
  if (request.count < 2) throw ArgumentError("grid needs at least 2 points");
  const Support s = response_support(fm.spec.trafo);
  Vector g(request.count);
  for (Index i = 0; i < request.count; ++i)
    g[i] = s.lower + s.width() * static_cast<double>(i) / static_cast<double>(request.count - 1);
  return g;
}

std::string profile_label(const GridRequest& request, std::size_t i) {
  if (i < request.profile_labels.size()) return request.profile_labels[i];
  return "p" + std::to_string(i);
}

}  // namespace

DistributionCurves distribution_curves(const FittedModel& fm, const GridRequest& request) {
  DistributionCurves out;
  out.grid = grid_or_default(request, fm);
  for (double p : request.probs)
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0,1)");

  for (std::size_t k = 0; k < request.profiles.size(); ++k) {
    const ProfileCurve curve(fm, request.profiles[k]);
    DistributionCurves::ProfileResult res;
    res.label = profile_label(request, k);
    res.cdf.resize(out.grid.size());
    res.density.resize(out.grid.size());
    for (Index i = 0; i < out.grid.size(); ++i) {
      res.cdf[i] = curve.cdf(out.grid[i]);
      res.density[i] = curve.density(out.grid[i]);
    }
    res.quantiles.resize(static_cast<Index>(request.probs.size()));
    for (std::size_t j = 0; j < request.probs.size(); ++j)
      res.quantiles[static_cast<Index>(j)] = curve.quantile(request.probs[j]);
    out.profiles.push_back(std::move(res));
  }
  return out;
}

CurveTable DistributionCurves::table() const {
  CurveTable t;
  for (const auto& res : profiles) {
    for (Index i = 0; i < grid.size(); ++i) {
      t.rows.push_back({res.label, "cdf", grid[i], res.cdf[i]});
      t.rows.push_back({res.label, "density", grid[i], res.density[i]});
    }
  }
  return t;
}

CurveTable decile_curves(const FittedModel& fm, const std::string& numeric_var,
                         const std::vector<Profile>& profiles,
                         const std::vector<std::string>& profile_labels,
                         const Vector& var_grid) {
  CurveTable t;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const std::string label =
        k < profile_labels.size() ? profile_labels[k] : "p" + std::to_string(k);
    for (Index g = 0; g < var_grid.size(); ++g) {
      Profile p = profiles[k];
      p[numeric_var] = format_double(var_grid[g]);
      const ProfileCurve curve(fm, p);
      for (int d = 1; d <= 9; ++d) {
        const double prob = d / 10.0;
        t.rows.push_back({label, "q0." + std::to_string(d), var_grid[g], curve.quantile(prob)});
      }
    }
  }
  return t;
}

OverlayResult ecdf_overlay(const FittedModel& fm, const Dataset& d,
                           const std::vector<std::string>& strata_vars) {
  if (strata_vars.empty()) throw ArgumentError("overlay needs at least one stratum variable");
  for (const std::string& v : fm.spec.covariate_names()) {
    if (std::find(strata_vars.begin(), strata_vars.end(), v) == strata_vars.end())
      throw SpecificationError(
          "overlay requires every model covariate to be an overlay stratum; '" + v +
          "' is not");
  }

  const StratumIndex cells = stratify(d, strata_vars);
  OverlayResult out;

  for (Index c = 0; c < cells.cells; ++c) {
    const std::string& label = cells.labels[static_cast<std::size_t>(c)];
    std::vector<Index> rows;
    for (Index i = 0; i < d.n(); ++i)
      if (cells.cell[static_cast<std::size_t>(i)] == c) rows.push_back(i);

    Vector y(static_cast<Index>(rows.size())), w(static_cast<Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      y[static_cast<Index>(j)] = d.response()[rows[j]];
      w[static_cast<Index>(j)] = d.weights()[rows[j]];
    }
    if (!(w.sum() > 0.0)) {
      out.warnings.push_back("cell '" + label + "' skipped: zero total weight");
      continue;
    }

    Profile profile;
    for (std::size_t v = 0; v < strata_vars.size(); ++v) {
      const Column& col = d.column(strata_vars[v]);
      profile[strata_vars[v]] =
          col.levels[static_cast<std::size_t>(col.codes[static_cast<std::size_t>(rows[0])])];
    }
    const ProfileCurve curve(fm, profile);

    const WeightedEcdf ecdf = weighted_ecdf(y, w);
    double sup = 0.0;
    for (Index j = 0; j < ecdf.values.size(); ++j) {
      const double yj = ecdf.values[j];
      const double model = curve.cdf(yj);
      sup = std::max({sup, std::abs(model - ecdf.cdf[j]), std::abs(model - ecdf.before(j))});
      out.table.rows.push_back({label, "ecdf", yj, ecdf.cdf[j]});
      out.table.rows.push_back({label, "cdf", yj, model});
    }
    out.sup_distance.emplace_back(label, sup);
  }
  return out;
}

}  // namespace transmod
