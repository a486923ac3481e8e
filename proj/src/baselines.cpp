#include "chieb/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "chieb/errors.hpp"
#include "chieb/quadrature.hpp"
#include "chieb/specfun.hpp"

namespace chieb {

namespace {

constexpr double kTableLambdaMax = 400.0;
constexpr int kTableSize = 2000;

double central_log_density_d1(double x, double k) {
    return (0.5 * k - 1.0) / x - 0.5;
}

double central_log_density_d2(double x, double k) {
    return -(0.5 * k - 1.0) / (x * x);
}

}  // namespace

NtModel::NtModel(std::shared_ptr<const MarginalModel> model, double x_max)
    : model_(std::move(model)), x_max_(x_max) {
    const double k = model_->df();
    // lambda -> E[z] under the noncentral chi-squared at that lambda; the
    // monotone back-transform of normal-scale interval endpoints.
    table_lambda_.reserve(kTableSize);
    table_ez_.reserve(kTableSize);
    const double x_floor = specfun::chisq_quantile(1e-12, k);
    for (int i = 0; i < kTableSize; ++i) {
        const double lam = kTableLambdaMax * i / (kTableSize - 1.0);
        const double sd = std::sqrt(2.0 * (k + 2.0 * lam));
        const double hi = k + lam + 12.0 * sd + 20.0;
        const auto f = [&](double x) {
            return z_of(x) * specfun::noncentral_chisq_pdf(x, k, lam);
        };
        double ez = integrate(f, x_floor, std::min(hi, k + lam), 1e-8, 1e-12);
        ez += integrate(f, std::min(hi, k + lam), hi, 1e-8, 1e-12);
        if (!table_ez_.empty()) ez = std::max(ez, table_ez_.back());  // keep monotone
        table_lambda_.push_back(lam);
        table_ez_.push_back(ez);
    }
}

double NtModel::z_of(double x) const {
    const double k = model_->df();
    const double sf = specfun::chisq_sf(x, k);
    if (sf <= 0.0) {
        throw numerical_error("NtModel: transform saturated (F_k(x) rounds to 1)");
    }
    if (sf < 0.5) return -specfun::norm_quantile(sf);
    return specfun::norm_quantile(specfun::chisq_cdf(x, k));
}

double NtModel::lambda_of_z(double e) const {
    if (e <= table_ez_.front()) return 0.0;
    if (e >= table_ez_.back()) {
        // linear continuation beyond the table
        const std::size_t n = table_ez_.size();
        const double slope = (table_lambda_[n - 1] - table_lambda_[n - 2]) /
                             std::max(1e-12, table_ez_[n - 1] - table_ez_[n - 2]);
        return table_lambda_.back() + slope * (e - table_ez_.back());
    }
    const auto it = std::lower_bound(table_ez_.begin(), table_ez_.end(), e);
    const std::size_t i = it - table_ez_.begin();
    const double t = (e - table_ez_[i - 1]) /
                     std::max(1e-300, table_ez_[i] - table_ez_[i - 1]);
    return table_lambda_[i - 1] + t * (table_lambda_[i] - table_lambda_[i - 1]);
}

NtModel::Result NtModel::posterior_interval(double x, double level) const {
    if (x > x_max_) {
        // Quantile transform loses accuracy far in the tail; extend the
        // x_max results linearly in x.
        const double step = 2.0;
        const Result r1 = posterior_interval(x_max_ - step, level);
        const Result r2 = posterior_interval(x_max_, level);
        Result out{};
        const double t = (x - x_max_) / step;
        out.mean_lambda = r2.mean_lambda + t * (r2.mean_lambda - r1.mean_lambda);
        out.lo = std::max(0.0, r2.lo + t * (r2.lo - r1.lo));
        out.hi = r2.hi + t * (r2.hi - r1.hi);
        out.extrapolated = true;
        return out;
    }
    const double k = model_->df();
    const double z = z_of(x);
    // chain rule through x(z): d log m / dz from the exact x-scale gradients
    const auto g = model_->exact_gradients_at(x);
    const double d1 = g.d1 - central_log_density_d1(x, k);
    const double d2 = g.d2 - central_log_density_d2(x, k);
    const double xp = specfun::norm_pdf(z) / specfun::chisq_pdf(x, k);
    const double xpp = xp * (-z - central_log_density_d1(x, k) * xp);
    const double lp = d1 * xp - z;
    const double lpp = d2 * xp * xp + d1 * xpp - 1.0;

    const double mu = z + lp;
    const double post_var = std::max(0.0, 1.0 + lpp);
    const double zq = specfun::norm_quantile(0.5 * (1.0 + level));
    const double half = zq * std::sqrt(post_var);

    Result out{};
    out.mean_lambda = lambda_of_z(mu);
    out.lo = lambda_of_z(mu - half);
    out.hi = lambda_of_z(mu + half);
    out.extrapolated = false;
    return out;
}

Interval by_interval(double x, double k, double q, std::size_t selected,
                     std::size_t total) {
    if (!(x > 0.0)) throw std::domain_error("by_interval: requires x > 0");
    if (selected < 1 || selected > total) {
        throw config_error("by_interval: requires 1 <= selected <= total");
    }
    const double tail = 0.5 * q * static_cast<double>(selected) / total;

    // hi: smallest lambda with P(X <= x | lambda) <= tail (cdf decreasing in lambda)
    double lo_b = 0.0, hi_b = std::max(1.0, x);
    while (specfun::noncentral_chisq_cdf(x, k, hi_b) > tail) {
        hi_b *= 2.0;
        if (hi_b > 1e8) throw numerical_error("by_interval: upper bracketing failed");
    }
    for (int it = 0; it < 200 && hi_b - lo_b > 1e-9 * (1.0 + hi_b); ++it) {
        const double m = 0.5 * (lo_b + hi_b);
        (specfun::noncentral_chisq_cdf(x, k, m) > tail ? lo_b : hi_b) = m;
    }
    const double hi = 0.5 * (lo_b + hi_b);

    // lo: largest lambda with P(X >= x | lambda) <= tail (sf increasing in lambda)
    double lo_val = 0.0;
    if (specfun::noncentral_chisq_sf(x, k, 0.0) < tail) {
        double a = 0.0, b = std::max(1.0, x);
        while (specfun::noncentral_chisq_sf(x, k, b) < tail) {
            b *= 2.0;
            if (b > 1e8) throw numerical_error("by_interval: lower bracketing failed");
        }
        for (int it = 0; it < 200 && b - a > 1e-9 * (1.0 + b); ++it) {
            const double m = 0.5 * (a + b);
            (specfun::noncentral_chisq_sf(x, k, m) < tail ? a : b) = m;
        }
        lo_val = 0.5 * (a + b);
    }
    return {lo_val, hi};
}

}  // namespace chieb
