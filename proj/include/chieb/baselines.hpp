#pragma once

#include <memory>
#include <vector>

#include "chieb/marginal.hpp"
#include "chieb/tweedie.hpp"

namespace chieb {

// Normal-transformation baseline: z = Phi^{-1}(F_k(x)), Tweedie's normal
// formula on the z scale, endpoints mapped back to lambda through the
// monotone lambda -> E[z] table. Immutable after construction.
class NtModel {
public:
    // Exact mode: z-scale log-density gradients from the transformed marginal.
    explicit NtModel(std::shared_ptr<const MarginalModel> model, double x_max = 80.0);

    struct Result {
        double mean_lambda;
        double lo, hi;
        bool extrapolated;
    };
    Result posterior_interval(double x, double level) const;

    double z_of(double x) const;        // Phi^{-1}(F_k(x)), survival-based in the tail
    double lambda_of_z(double e) const; // table inversion (0 below the null mean-z)

private:
    std::shared_ptr<const MarginalModel> model_;
    double x_max_;
    std::vector<double> table_lambda_, table_ez_;
};

// Equal-tailed frequentist interval for lambda at level 1 - q R / m, by
// inverting the noncentral chi-squared CDF in lambda.
Interval by_interval(double x, double k, double q, std::size_t selected,
                     std::size_t total);

}  // namespace chieb
