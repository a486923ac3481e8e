#pragma once

#include <utility>

namespace chieb::specfun {

// log|Gamma(a)| together with the sign of Gamma(a).
struct SignedLog {
    double log_abs;
    int sign;  // -1, 0 or +1
};

// Valid for any real a that is not a non-positive integer; negative arguments
// go through the reflection formula.
double log_gamma(double a);
SignedLog log_gamma_signed(double a);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double lower_reg_gamma(double a, double x);
double upper_reg_gamma(double a, double x);

// Central chi-squared, k > 0.
double chisq_pdf(double x, double k);
double chisq_cdf(double x, double k);
double chisq_sf(double x, double k);
double chisq_quantile(double p, double k);

// Noncentral chi-squared as a Poisson mixture of central ones; the mixture is
// truncated once the remaining Poisson mass drops below 1e-12.
double noncentral_chisq_pdf(double x, double k, double lambda);
double noncentral_chisq_cdf(double x, double k, double lambda);
double noncentral_chisq_sf(double x, double k, double lambda);

// Standard normal.
double norm_pdf(double z);
double norm_cdf(double z);
double norm_quantile(double p);

// True when m is a non-positive even integer, i.e. Gamma(m/2) has a pole.
bool is_gamma_half_pole(double m);

}  // namespace chieb::specfun
