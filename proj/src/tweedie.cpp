#include "chieb/tweedie.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chieb/errors.hpp"
#include "chieb/specfun.hpp"

namespace chieb {

namespace {

constexpr double kRatioFloor = 1e-3;  // floor on 1 + 2l'
constexpr double kR4Floor = 1e-6;     // floor on the g_{k-4}/g_k denominator

struct GradEval {
    double l1, l2, l3, l4;
    double r2, r4, r6, r8;  // g_{k-2i}/g_k reconstructed from the gradients
    bool extrapolated;
    bool ratio_clamped;
};

GradEval eval_gradients(const GradientModel& g, double x) {
    GradEval e{};
    const GradientValue v1 = g.derivative(x, 1);
    const GradientValue v2 = g.derivative(x, 2);
    const GradientValue v3 = g.derivative(x, 3);
    const GradientValue v4 = g.derivative(x, 4);
    e.l1 = v1.value;
    e.l2 = v2.value;
    e.l3 = v3.value;
    e.l4 = v4.value;
    e.extrapolated = v1.extrapolated || v2.extrapolated || v3.extrapolated ||
                     v4.extrapolated;
    e.r2 = 1.0 + 2.0 * e.l1;
    if (e.r2 < kRatioFloor) {
        e.r2 = kRatioFloor;
        e.ratio_clamped = true;
    }
    e.r4 = 4.0 * e.l2 + e.r2 * e.r2;
    e.r6 = 8.0 * e.l3 + 12.0 * e.l2 * e.r2 + e.r2 * e.r2 * e.r2;
    e.r8 = 16.0 * e.l4 + 32.0 * e.l3 * e.r2 + 24.0 * e.l2 * e.r2 * e.r2 +
           48.0 * e.l2 * e.l2 + e.r2 * e.r2 * e.r2 * e.r2;
    return e;
}

void merge(TweedieFlags* flags, const GradEval& e) {
    if (!flags) return;
    flags->extrapolated_gradient |= e.extrapolated;
    flags->clamped_ratio |= e.ratio_clamped;
}

}  // namespace

std::string TweedieFlags::to_string() const {
    std::string s;
    auto add = [&s](const char* tag) {
        if (!s.empty()) s += '|';
        s += tag;
    };
    if (clamped_mean) add("clamped_mean");
    if (clamped_variance) add("clamped_variance");
    if (clamped_ratio) add("clamped_ratio");
    if (extrapolated_gradient) add("extrapolated");
    return s;
}

EffectDofEstimates naive_effect_dof(double x, double k) {
    if (x <= 0.0) throw std::domain_error("naive_effect_dof: requires x > 0");
    return {std::max(0.0, x - k + 4.0), std::max(0.0, x - k + 2.0), 0.0};
}

double posterior_effect_dof(const GradientModel& g, double x, double k,
                            TweedieFlags* flags) {
    const GradEval e = eval_gradients(g, x);
    merge(flags, e);
    return 2.0 * x * (2.0 * e.l2 / e.r2 + e.l1) + (x - k + 4.0);
}

double posterior_mean(const GradientModel& g, double x, double k, TweedieFlags* flags) {
    const GradEval e = eval_gradients(g, x);
    merge(flags, e);
    const double bracket = 2.0 * x * (2.0 * e.l2 / e.r2 + e.l1) + (x - k + 4.0);
    double mean = bracket * e.r2;
    if (mean < 0.0) {
        mean = 0.0;
        if (flags) flags->clamped_mean = true;
    }
    return mean;
}

double second_factorial_moment(const GradientModel& g, double x, double k,
                               TweedieFlags* flags) {
    GradEval e = eval_gradients(g, x);
    merge(flags, e);
    // r4 is the formal ratio g_{k-4}/g_k, which is legitimately negative when
    // k - 4 < 0 and the continued density dominates; only guard the division
    // against the zero crossing, preserving the sign.
    double r4 = e.r4;
    if (std::fabs(r4) < kR4Floor) {
        r4 = std::copysign(kR4Floor, r4 == 0.0 ? 1.0 : r4);
        if (flags) flags->clamped_ratio = true;
    }
    double m2 = x * x * e.r8 / r4 - 2.0 * (k - 6.0) * x * e.r6 / r4 +
                (k - 4.0) * (k - 6.0);
    // For k >= 4 this is a genuine expectation of 4J(J-1) and must be
    // non-negative; for k < 4 it is a signed formal quantity (the tilting
    // density g_{k-4} changes sign) and must be left alone.
    if (m2 < 0.0 && k >= 4.0) {
        m2 = 0.0;
        if (flags) flags->clamped_variance = true;
    }
    return m2;
}

double posterior_variance(const GradientModel& g, double x, double k,
                          TweedieFlags* flags) {
    const GradEval e = eval_gradients(g, x);
    merge(flags, e);
    const double m1 = posterior_effect_dof(g, x, k, nullptr);
    const double m2 = second_factorial_moment(g, x, k, flags);
    double var = 4.0 * m2 * e.l2 + (m2 - m1 * m1) * e.r2 * e.r2;
    if (var < 0.0) {
        var = 0.0;
        if (flags) flags->clamped_variance = true;
    }
    return var;
}

double local_fdr(double x, double k, double pi0, double g_k_at_x) {
    if (x <= 0.0) throw std::domain_error("local_fdr: requires x > 0");
    if (pi0 < 0.0 || pi0 > 1.0) throw std::domain_error("local_fdr: pi0 in [0,1]");
    if (!(g_k_at_x > 0.0)) throw std::domain_error("local_fdr: requires g_k(x) > 0");
    const double f = specfun::chisq_pdf(x, k);
    return std::clamp(pi0 * f / g_k_at_x, 0.0, 1.0);
}

AdjustedMoments adjust_for_null(double mean, double variance, double fdr) {
    if (fdr >= 1.0 - 1e-12) {
        throw numerical_error("adjust_for_null: fdr ~ 1 (all-null)");
    }
    if (fdr < 0.0) throw std::domain_error("adjust_for_null: fdr >= 0");
    AdjustedMoments out{};
    out.mean = mean / (1.0 - fdr);
    out.variance = variance / (1.0 - fdr) - fdr * out.mean * out.mean;
    if (out.variance < 0.0) {
        out.variance = 0.0;
        out.clamped_variance = true;
    }
    return out;
}

Interval posterior_interval(double mean, double variance, double level) {
    if (variance < 0.0) throw std::domain_error("posterior_interval: variance >= 0");
    const double z = specfun::norm_quantile(0.5 * (1.0 + level));
    const double half = z * std::sqrt(variance);
    return {std::max(0.0, mean - half), mean + half};
}

PosteriorSummary summarize(const GradientModel& g, double x, double k, double level,
                           std::optional<double> pi0) {
    PosteriorSummary s;
    s.x = x;
    s.k = k;
    s.mean = posterior_mean(g, x, k, &s.flags);
    s.variance = posterior_variance(g, x, k, &s.flags);
    if (pi0) {
        const double gk = g.density(x);
        if (std::isfinite(gk) && gk > 0.0) {
            s.fdr = local_fdr(x, k, *pi0, gk);
            const AdjustedMoments adj = adjust_for_null(s.mean, s.variance, *s.fdr);
            s.mean = adj.mean;
            s.variance = adj.variance;
            s.flags.clamped_variance |= adj.clamped_variance;
        }
    }
    const Interval iv = posterior_interval(s.mean, s.variance, level);
    s.interval_lo = std::min(iv.lo, s.mean);
    s.interval_hi = std::max(iv.hi, s.mean);
    return s;
}

double estimate_pi0(const std::vector<double>& p_values) {
    if (p_values.empty()) throw insufficient_data_error("estimate_pi0: empty input");
    std::size_t above = 0;
    for (const double p : p_values) {
        if (p > 0.5) ++above;
    }
    return std::min(1.0, 2.0 * static_cast<double>(above) / p_values.size());
}

}  // namespace chieb
