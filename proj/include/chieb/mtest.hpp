#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace chieb {

struct BatteryRecord {
    std::string id;
    double x = 0.0;
    double k = 0.0;
    std::optional<bool> is_null;     // simulation truth, when available
    std::optional<double> lambda;
};

struct Battery {
    std::vector<BatteryRecord> records;

    void validate() const;  // unique ids, x > 0, k > 0
    std::size_t size() const { return records.size(); }
};

// p_i = P(chi^2_{k_i} >= x_i) under the central null.
std::vector<double> p_values(const Battery& b);

struct BhResult {
    double alpha = 0.0;
    std::vector<std::size_t> rejected;  // indices into the p-value sequence
    std::vector<std::string> rejected_ids;
    double cutoff_x = 0.0;              // smallest rejected statistic (battery form)
    std::size_t count = 0;
};

// Benjamini-Hochberg step-up; ties at the threshold are all rejected.
BhResult bh_select(const std::vector<double>& p, double alpha);
BhResult bh_select(const Battery& b, double alpha);

struct EmpiricalFdr {
    double fdr = 0.0;
    std::size_t true_positives = 0;
};
EmpiricalFdr empirical_fdr(const BhResult& result, const Battery& truth);

// Definition of posterior significance: mean/k >= z^2_{1-alpha/2}.
bool posterior_significance(double mean, double k, double alpha);

// mean_a >= mean_b + z_{1-alpha/2} sqrt(var_b).
bool dominates(double mean_a, double mean_b, double var_b, double alpha);

// mean_a - z sqrt(var_a) >= mean_b + z sqrt(var_b).
bool interval_dominates(double mean_a, double var_a, double mean_b, double var_b,
                        double alpha);

}  // namespace chieb
