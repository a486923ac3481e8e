#include "chieb/specfun.hpp"

#include <cmath>
#include <limits>

#include "chieb/errors.hpp"

namespace chieb::specfun {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTruncationMass = 1e-12;

bool is_nonpositive_integer(double a) {
    return a <= 0.0 && a == std::floor(a);
}

}  // namespace

bool is_gamma_half_pole(double m) {
    return is_nonpositive_integer(m / 2.0);
}

double log_gamma(double a) {
    return log_gamma_signed(a).log_abs;
}

SignedLog log_gamma_signed(double a) {
    if (is_nonpositive_integer(a)) {
        throw pole_error("log_gamma: pole at non-positive integer argument");
    }
    if (a > 0.0) {
        return {std::lgamma(a), 1};
    }
    // Reflection: Gamma(a) = pi / (sin(pi a) Gamma(1 - a)), 1 - a > 1 > 0.
    const double s = std::sin(kPi * a);
    const double log_abs = std::log(kPi) - std::log(std::fabs(s)) - std::lgamma(1.0 - a);
    return {log_abs, s > 0.0 ? 1 : -1};
}

namespace {

// Series expansion of P(a, x), good for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 2000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numerical_error("lower_reg_gamma: series did not converge");
}

// Continued fraction for Q(a, x), good for x >= a + 1 (modified Lentz).
double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 2000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numerical_error("upper_reg_gamma: continued fraction did not converge");
}

}  // namespace

double lower_reg_gamma(double a, double x) {
    if (a <= 0.0) throw std::domain_error("lower_reg_gamma: requires a > 0");
    if (x < 0.0) throw std::domain_error("lower_reg_gamma: requires x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double upper_reg_gamma(double a, double x) {
    if (a <= 0.0) throw std::domain_error("upper_reg_gamma: requires a > 0");
    if (x < 0.0) throw std::domain_error("upper_reg_gamma: requires x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

double chisq_pdf(double x, double k) {
    if (k <= 0.0) throw std::domain_error("chisq_pdf: requires k > 0");
    if (x < 0.0) return 0.0;
    if (x == 0.0) return k == 2.0 ? 0.5 : (k < 2.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double h = 0.5 * k;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h));
}

double chisq_cdf(double x, double k) {
    if (k <= 0.0) throw std::domain_error("chisq_cdf: requires k > 0");
    if (x < 0.0) throw std::domain_error("chisq_cdf: requires x >= 0");
    return lower_reg_gamma(0.5 * k, 0.5 * x);
}

double chisq_sf(double x, double k) {
    if (k <= 0.0) throw std::domain_error("chisq_sf: requires k > 0");
    if (x < 0.0) throw std::domain_error("chisq_sf: requires x >= 0");
    return upper_reg_gamma(0.5 * k, 0.5 * x);
}

double chisq_quantile(double p, double k) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chisq_quantile: requires 0 < p < 1");
    if (k <= 0.0) throw std::domain_error("chisq_quantile: requires k > 0");
    // Bracket, then bisection refined with Newton steps.
    double lo = 0.0;
    double hi = k + 10.0 * std::sqrt(2.0 * k) + 10.0;
    while (chisq_cdf(hi, k) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw numerical_error("chisq_quantile: bracketing failed");
    }
    double x = k;  // start near the bulk
    if (chisq_cdf(x, k) < p) lo = x; else hi = x;
    x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = chisq_cdf(x, k) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double d = chisq_pdf(x, k);
        double step_x = x;
        if (d > 0.0) {
            step_x = x - f / d;
        }
        if (step_x <= lo || step_x >= hi) {
            step_x = 0.5 * (lo + hi);
        }
        if (std::fabs(chisq_cdf(step_x, k) - p) <= 1e-12 || hi - lo < 1e-14 * (1.0 + x)) {
            return step_x;
        }
        x = step_x;
    }
    if (std::fabs(chisq_cdf(x, k) - p) <= 1e-9) return x;
    throw numerical_error("chisq_quantile: did not converge");
}

namespace {

// Poisson(lambda/2) weights visited outward from the mode until the remaining
// mass is below kTruncationMass; accumulates weight * f(k + 2j).
template <typename Fn>
double poisson_mixture(double k, double lambda, Fn term) {
    const double mu = 0.5 * lambda;
    if (mu == 0.0) return term(0);
    const int mode = static_cast<int>(mu);
    const double log_w_mode = -mu + mode * std::log(mu) - std::lgamma(mode + 1.0);
    double sum = 0.0, mass = 0.0;
    // upward from the mode
    double w = std::exp(log_w_mode);
    for (int j = mode; j < mode + 100000; ++j) {
        sum += w * term(j);
        mass += w;
        if (w < kTruncationMass && j > mu) break;
        w *= mu / (j + 1.0);
    }
    // downward from the mode
    w = std::exp(log_w_mode);
    for (int j = mode - 1; j >= 0; --j) {
        w *= (j + 1.0) / mu;
        sum += w * term(j);
        mass += w;
        if (w < kTruncationMass) break;
    }
    (void)mass;
    return sum;
}

}  // namespace

double noncentral_chisq_pdf(double x, double k, double lambda) {
    if (k <= 0.0) throw std::domain_error("noncentral_chisq_pdf: requires k > 0");
    if (x < 0.0 || lambda < 0.0) throw std::domain_error("noncentral_chisq_pdf: negative input");
    if (lambda == 0.0) return chisq_pdf(x, k);
    if (x == 0.0) return k < 2.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return poisson_mixture(k, lambda, [&](int j) { return chisq_pdf(x, k + 2.0 * j); });
}

double noncentral_chisq_cdf(double x, double k, double lambda) {
    if (k <= 0.0) throw std::domain_error("noncentral_chisq_cdf: requires k > 0");
    if (x < 0.0 || lambda < 0.0) throw std::domain_error("noncentral_chisq_cdf: negative input");
    if (lambda == 0.0) return chisq_cdf(x, k);
    if (x == 0.0) return 0.0;
    const double p = poisson_mixture(k, lambda, [&](int j) { return chisq_cdf(x, k + 2.0 * j); });
    return std::min(1.0, std::max(0.0, p));
}

double noncentral_chisq_sf(double x, double k, double lambda) {
    if (k <= 0.0) throw std::domain_error("noncentral_chisq_sf: requires k > 0");
    if (x < 0.0 || lambda < 0.0) throw std::domain_error("noncentral_chisq_sf: negative input");
    if (lambda == 0.0) return chisq_sf(x, k);
    if (x == 0.0) return 1.0;
    const double p = poisson_mixture(k, lambda, [&](int j) { return chisq_sf(x, k + 2.0 * j); });
    return std::min(1.0, std::max(0.0, p));
}

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: requires 0 < p < 1");
    // Acklam's rational approximation, then two Newton refinements.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double z;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = norm_cdf(z) - p;
        const double u = e / norm_pdf(z);
        z -= u / (1.0 + 0.5 * z * u);  // Halley step
    }
    return z;
}

}  // namespace chieb::specfun
