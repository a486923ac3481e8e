#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chieb/gradient_model.hpp"

namespace chieb {

struct EffectDofEstimates {
    double ml_style;      // (x - k + 4)+
    double moment_style;  // (x - k + 2)+
    double tweedie;       // gradient-based E_{k-2}(2J | x)
};

struct TweedieFlags {
    bool clamped_mean = false;
    bool clamped_variance = false;
    bool clamped_ratio = false;  // 1 + 2l' or the R4 denominator hit its floor
    bool extrapolated_gradient = false;

    bool any() const {
        return clamped_mean || clamped_variance || clamped_ratio || extrapolated_gradient;
    }
    std::string to_string() const;
};

struct PosteriorSummary {
    double x = 0.0;
    double k = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    std::optional<double> fdr;
    TweedieFlags flags;
};

EffectDofEstimates naive_effect_dof(double x, double k);

double posterior_effect_dof(const GradientModel& g, double x, double k,
                            TweedieFlags* flags = nullptr);
double posterior_mean(const GradientModel& g, double x, double k,
                      TweedieFlags* flags = nullptr);
double second_factorial_moment(const GradientModel& g, double x, double k,
                               TweedieFlags* flags = nullptr);
double posterior_variance(const GradientModel& g, double x, double k,
                          TweedieFlags* flags = nullptr);

// pi0 f_k(x) / g_k(x), clamped to [0, 1].
double local_fdr(double x, double k, double pi0, double g_k_at_x);

// Conditional-on-non-null adjustment for priors with an atom at zero.
struct AdjustedMoments {
    double mean;
    double variance;
    bool clamped_variance = false;
};
AdjustedMoments adjust_for_null(double mean, double variance, double fdr);

struct Interval {
    double lo, hi;
};
Interval posterior_interval(double mean, double variance, double level);

// Full per-case pipeline: mean, variance, interval, optional fdr adjustment.
PosteriorSummary summarize(const GradientModel& g, double x, double k, double level,
                           std::optional<double> pi0 = std::nullopt);

// Plug-in pi0 estimate: twice the fraction of p-values above 1/2, capped at 1.
double estimate_pi0(const std::vector<double>& p_values);

}  // namespace chieb
