#include "transmod/simulate.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "transmod/errors.hpp"
#include "transmod/link.hpp"
#include "transmod/rng.hpp"
#include "transmod/text.hpp"

namespace transmod {

namespace {

constexpr double kFemaleShare = 0.52;

const std::vector<std::string>& sex_levels() {
  static const std::vector<std::string> v = {"female", "male"};
  return v;
}
const std::vector<std::string>& smoking_levels() {
  static const std::vector<std::string> v = {"never", "former", "light",
                                             "medium", "heavy"};
  return v;
}
const std::vector<std::string>& activity_levels() {
  static const std::vector<std::string> v = {"low", "medium", "high"};
  return v;
}
const std::vector<std::string>& edu_levels() {
  static const std::vector<std::string> v = {"basic", "secondary", "tertiary"};
  return v;
}
const std::vector<std::string>& nat_levels() {
  static const std::vector<std::string> v = {"swiss", "foreign"};
  return v;
}
const std::vector<std::string>& region_levels() {
  static const std::vector<std::string> v = {"german", "french", "italian"};
  return v;
}

double level_effect(const std::vector<std::string>& levels,
                    const std::vector<double>& effects, const std::string& value,
                    const char* var) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == value) return effects[i];
  }
  throw ArgumentError(std::string("unknown ") + var + " level '" + value + "'");
}

int draw_level(Rng& rng, const std::vector<double>& probs) {
  double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

Column categorical_column(std::string name, std::vector<int> codes,
                          std::vector<std::string> levels) {
  Column c;
  c.name = std::move(name);
  c.type = ColumnType::Categorical;
  c.codes = std::move(codes);
  c.levels = std::move(levels);
  return c;
}

Column numeric_column(std::string name, Vector values) {
  Column c;
  c.name = std::move(name);
  c.type = ColumnType::Numeric;
  c.numeric = std::move(values);
  return c;
}

}  // namespace

void SimulateOptions::validate() const {
  if (n < 1) throw ArgumentError("simulate requires n >= 1");
  if (!std::isfinite(effect_scale) || effect_scale < 0.0) {
    throw ArgumentError("effect scale must be finite and non-negative");
  }
}

ShsGenerator::ShsGenerator(double effect_scale)
    : scale_(effect_scale), basis_(5, Support(14.0, 50.0)) {
  theta_female_.resize(6);
  theta_female_ << -3.374, -1.061, 1.799, 3.829, 5.198, 6.027;
  theta_male_.resize(6);
  theta_male_ << -4.096, -1.973, 1.294, 3.740, 5.291, 6.197;
}

double ShsGenerator::baseline_h(double y, bool male) const {
  return basis_.eval(y).dot(male ? theta_male_ : theta_female_);
}

double ShsGenerator::shift(const Profile& row) const {
  const std::string& sex = profile_value(row, "sex");
  bool male = (sex == "male");
  if (!male && sex != "female") {
    throw ArgumentError("unknown sex level '" + sex + "'");
  }
  double age = profile_numeric(row, "age");

  double smoke = level_effect(smoking_levels(),
                              {0.0, 0.18, 0.02, -0.22, -0.42},
                              profile_value(row, "smoking"), "smoking");
  double act = level_effect(activity_levels(), {0.0, -0.15, -0.35},
                            profile_value(row, "activity"), "activity");
  double edu = level_effect(edu_levels(), {0.0, -0.10, -0.28},
                            profile_value(row, "edu"), "edu");
  double nat = level_effect(nat_levels(), {0.0, 0.12},
                            profile_value(row, "nat"), "nat");
  double region = level_effect(region_levels(), {0.0, -0.06, 0.08},
                               profile_value(row, "region"), "region");

  double delta = smoke * (male ? 1.25 : 1.0);
  delta += 0.0045 * profile_numeric(row, "alcohol");
  delta += -0.05 * profile_numeric(row, "fv");
  delta += act + edu + nat + region;
  delta += 0.015 * (age - 46.0);
  if (!male) {
    double z = (age - 30.0) / 5.0;
    delta += 0.8 * std::exp(-0.5 * z * z);
  }
  return scale_ * delta;
}

double ShsGenerator::conditional_cdf(double y, const Profile& row) const {
  bool male = (profile_value(row, "sex") == "male");
  return expit(baseline_h(y, male) - shift(row));
}

double ShsGenerator::marginal_cdf(double y) const {
  return kFemaleShare * expit(baseline_h(y, false)) +
         (1.0 - kFemaleShare) * expit(baseline_h(y, true));
}

double ShsGenerator::sample_bmi(double shift_value, bool male, double u) const {
  const Vector& theta = male ? theta_male_ : theta_female_;
  double target = logit(u) + shift_value;
  auto h = [&](double y) { return basis_.eval(y).dot(theta); };

  double lo = basis_.support().lower;
  double hi = basis_.support().upper;
  double step = hi - lo;
  for (int i = 0; h(lo) > target; ++i) {
    if (i >= 100) throw NumericError("failed to bracket simulated response");
    lo -= step;
    step *= 2.0;
  }
  step = hi - lo;
  for (int i = 0; h(hi) < target; ++i) {
    if (i >= 100) throw NumericError("failed to bracket simulated response");
    hi += step;
    step *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    double mid = 0.5 * (lo + hi);
    (h(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Dataset ShsGenerator::sample(Index n, std::uint64_t seed,
                             bool random_weights) const {
  if (n < 1) throw ArgumentError("simulate requires n >= 1");
  Rng rng(mix_seed(seed, 0x5353485301ULL));

  std::vector<int> sex(n), smoking(n), activity(n), edu(n), nat(n), region(n);
  Vector age(n), alcohol(n), fv(n), weights(n), bmi(n);

  for (Index i = 0; i < n; ++i) {
    bool male = rng.next_double() >= kFemaleShare;
    sex[i] = male ? 1 : 0;
    smoking[i] = draw_level(rng, {0.45, 0.20, 0.15, 0.12, 0.08});
    age[i] = 18.0 + 56.0 * rng.next_double();
    double a = rng.next_double();
    alcohol[i] = (a < 0.35) ? 0.0 : 45.0 * (a - 0.35) * (a - 0.35);
    fv[i] = static_cast<double>(rng.bounded(8));
    activity[i] = draw_level(rng, {0.30, 0.45, 0.25});
    edu[i] = draw_level(rng, {0.20, 0.50, 0.30});
    nat[i] = draw_level(rng, {0.75, 0.25});
    region[i] = draw_level(rng, {0.70, 0.22, 0.08});
    weights[i] = random_weights ? 0.5 + 2.0 * rng.next_double() : 1.0;

    Profile row;
    row["sex"] = sex_levels()[sex[i]];
    row["smoking"] = smoking_levels()[smoking[i]];
    row["age"] = format_double(age[i]);
    row["alcohol"] = format_double(alcohol[i]);
    row["fv"] = format_double(fv[i]);
    row["activity"] = activity_levels()[activity[i]];
    row["edu"] = edu_levels()[edu[i]];
    row["nat"] = nat_levels()[nat[i]];
    row["region"] = region_levels()[region[i]];
    bmi[i] = sample_bmi(shift(row), male, rng.next_open());
  }

  std::vector<Column> cols;
  cols.push_back(categorical_column("sex", std::move(sex), sex_levels()));
  cols.push_back(
      categorical_column("smoking", std::move(smoking), smoking_levels()));
  cols.push_back(numeric_column("age", std::move(age)));
  cols.push_back(numeric_column("alcohol", std::move(alcohol)));
  cols.push_back(numeric_column("fv", std::move(fv)));
  cols.push_back(
      categorical_column("activity", std::move(activity), activity_levels()));
  cols.push_back(categorical_column("edu", std::move(edu), edu_levels()));
  cols.push_back(categorical_column("nat", std::move(nat), nat_levels()));
  cols.push_back(
      categorical_column("region", std::move(region), region_levels()));

  return Dataset("bmi", std::move(bmi), std::move(cols), std::move(weights),
                 "weights");
}

Dataset simulate_shs(const SimulateOptions& opt) {
  opt.validate();
  ShsGenerator gen(opt.effect_scale);
  return gen.sample(opt.n, opt.seed, opt.random_weights);
}

}  // namespace transmod
