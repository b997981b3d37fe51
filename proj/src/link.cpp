#include "transmod/link.hpp"

#include <cmath>

#include "transmod/errors.hpp"
#include "transmod/rng.hpp"

namespace transmod {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2
constexpr double kInvSqrt2 = 0.70710678118654752440;
}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z - kHalfLog2Pi); }

// PPND16 from Wichura (1988), algorithm AS 241. Accurate to ~1e-16 relative.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

double log1pexp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double expit(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("logit: p must lie in (0,1)");
  return std::log(p) - std::log1p(-p);
}

double Rng::normal() { return normal_quantile(next_open()); }

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  // Partial Fisher-Yates: the first k slots are the sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

double Link::cdf(double z) const {
  return kind == LinkKind::Probit ? normal_cdf(z) : expit(z);
}

double Link::pdf(double z) const {
  if (kind == LinkKind::Probit) return normal_pdf(z);
  const double p = expit(z);
  return p * (1.0 - p);
}

double Link::pdf_deriv(double z) const {
  if (kind == LinkKind::Probit) return -z * normal_pdf(z);
  const double p = expit(z);
  return p * (1.0 - p) * (1.0 - 2.0 * p);
}

double Link::quantile(double p) const {
  return kind == LinkKind::Probit ? normal_quantile(p) : logit(p);
}

double Link::log_pdf(double z) const {
  if (kind == LinkKind::Probit) return -0.5 * z * z - kHalfLog2Pi;
  return z - 2.0 * log1pexp(z);
}

double Link::dlog_pdf(double z) const {
  if (kind == LinkKind::Probit) return -z;
  return 1.0 - 2.0 * expit(z);
}

double Link::d2log_pdf(double z) const {
  if (kind == LinkKind::Probit) return -1.0;
  const double p = expit(z);
  return -2.0 * p * (1.0 - p);
}

Link Link::from_name(const std::string& name) {
  if (name == "probit") return Link{LinkKind::Probit};
  if (name == "logit") return Link{LinkKind::Logit};
  throw ArgumentError("unknown link '" + name + "' (expected probit or logit)");
}

}  // namespace transmod
