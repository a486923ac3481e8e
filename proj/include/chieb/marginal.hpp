#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "chieb/gradient_model.hpp"
#include "chieb/prior.hpp"
#include "chieb/specfun.hpp"

namespace chieb {

// Formal chi-squared density f_m(x); m may be negative (non-even-integer), in
// which case the value can be negative through the Gamma reflection sign.
double formal_chisq_density(double x, double m);
specfun::SignedLog log_formal_chisq_density(double x, double m);

struct HierDraw {
    double lambda;
    int j;
    double x;
};

// Marginal model g_k under a prior: mixture weights p_j cached eagerly,
// shifted marginals g_{k-2i} by the weight series, exact log-gradients, a
// seeded sampler and a quadrature posterior oracle. Immutable after
// construction.
class MarginalModel {
public:
    MarginalModel(PriorSpec prior, double k);

    double df() const { return k_; }
    const PriorSpec& prior() const { return prior_; }
    const std::vector<double>& weights() const { return weights_; }

    // g_{k-2i}(x); formal (possibly negative) when k - 2i <= 0.
    double marginal_density(double x, int df_shift = 0) const;
    specfun::SignedLog log_marginal_density(double x, int df_shift = 0) const;

    // CDF/quantile of the observable X (df_shift = 0 only).
    double marginal_cdf(double x) const;
    double marginal_quantile(double p) const;

    struct LogGradients {
        double d1, d2, d3, d4;
    };
    LogGradients exact_gradients_at(double x) const;

    std::shared_ptr<GradientModel> exact_log_gradients() const;

    std::vector<HierDraw> sample(std::size_t n, std::uint64_t seed) const;

    struct PosteriorMoments {
        double mean, second_moment, variance;
    };
    // Brute-force numerator/denominator integration of the posterior of
    // lambda; the testing ground truth for every Tweedie formula.
    PosteriorMoments oracle_posterior(double x) const;

private:
    PriorSpec prior_;
    double k_;
    std::vector<double> weights_;  // p_j, truncated at residual mass 1e-12
};

std::shared_ptr<GradientModel> exact_gradient_model_from_json(const nlohmann::json& j);

}  // namespace chieb
