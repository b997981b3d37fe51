#pragma once

#include <string>

namespace transmod {

double normal_cdf(double z);
double normal_pdf(double z);
// Inverse standard normal CDF (Wichura's PPND16 rational approximation).
double normal_quantile(double p);

// expit(z) and its inverse, stable in both tails.
double expit(double z);
double logit(double p);
// log(1 + exp(z)) without overflow.
double log1pexp(double z);

enum class LinkKind { Probit, Logit };

// The fixed inverse-link distribution F: the response CDF is F(h(y|x)).
// Densities and score/Hessian terms work on log F' directly so extreme
// transformation values stay finite.
struct Link {
  LinkKind kind = LinkKind::Logit;

  double cdf(double z) const;
  double pdf(double z) const;        // F'
  double pdf_deriv(double z) const;  // F''
  double quantile(double p) const;   // F^{-1}
  double log_pdf(double z) const;    // log F', closed form per link
  double dlog_pdf(double z) const;   // d/dz log F'
  double d2log_pdf(double z) const;  // d^2/dz^2 log F'

  std::string name() const { return kind == LinkKind::Probit ? "probit" : "logit"; }
  static Link from_name(const std::string& name);
};

}  // namespace transmod
