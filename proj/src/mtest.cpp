#include "chieb/mtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "chieb/errors.hpp"
#include "chieb/specfun.hpp"

namespace chieb {

void Battery::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (!(r.x > 0.0)) throw data_error("Battery: statistic must be positive (id " + r.id + ")");
        if (!(r.k > 0.0)) throw data_error("Battery: df must be positive (id " + r.id + ")");
        if (!seen.insert(r.id).second) throw data_error("Battery: duplicate id " + r.id);
    }
}

std::vector<double> p_values(const Battery& b) {
    std::vector<double> out;
    out.reserve(b.records.size());
    for (const auto& r : b.records) {
        out.push_back(specfun::chisq_sf(r.x, r.k));
    }
    return out;
}

BhResult bh_select(const std::vector<double>& p, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("bh_select: alpha in (0,1)");
    const std::size_t m = p.size();
    BhResult res;
    res.alpha = alpha;
    if (m == 0) return res;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    // largest i with p_(i) <= i alpha / m
    double threshold = -1.0;
    for (std::size_t i = m; i-- > 0;) {
        if (p[order[i]] <= (i + 1) * alpha / m) {
            threshold = p[order[i]];
            break;
        }
    }
    if (threshold >= 0.0) {
        for (std::size_t i = 0; i < m; ++i) {
            if (p[i] <= threshold) res.rejected.push_back(i);
        }
    }
    res.count = res.rejected.size();
    return res;
}

BhResult bh_select(const Battery& b, double alpha) {
    BhResult res = bh_select(p_values(b), alpha);
    double cutoff = std::numeric_limits<double>::infinity();
    for (const std::size_t i : res.rejected) {
        res.rejected_ids.push_back(b.records[i].id);
        cutoff = std::min(cutoff, b.records[i].x);
    }
    res.cutoff_x = res.rejected.empty() ? 0.0 : cutoff;
    return res;
}

EmpiricalFdr empirical_fdr(const BhResult& result, const Battery& truth) {
    EmpiricalFdr out;
    std::size_t false_pos = 0;
    for (const std::size_t i : result.rejected) {
        const auto& r = truth.records.at(i);
        if (!r.is_null.has_value()) throw data_error("empirical_fdr: truth labels missing");
        if (*r.is_null) {
            ++false_pos;
        } else {
            ++out.true_positives;
        }
    }
    out.fdr = static_cast<double>(false_pos) /
              std::max<std::size_t>(1, result.rejected.size());
    return out;
}

bool posterior_significance(double mean, double k, double alpha) {
    if (mean < 0.0) throw std::domain_error("posterior_significance: mean >= 0");
    const double z = specfun::norm_quantile(1.0 - 0.5 * alpha);
    return mean / k >= z * z;
}

bool dominates(double mean_a, double mean_b, double var_b, double alpha) {
    if (var_b < 0.0) throw std::domain_error("dominates: var_b >= 0");
    const double z = specfun::norm_quantile(1.0 - 0.5 * alpha);
    return mean_a >= mean_b + z * std::sqrt(var_b);
}

bool interval_dominates(double mean_a, double var_a, double mean_b, double var_b,
                        double alpha) {
    if (var_a < 0.0 || var_b < 0.0) throw std::domain_error("interval_dominates: vars >= 0");
    const double z = specfun::norm_quantile(1.0 - 0.5 * alpha);
    return mean_a - z * std::sqrt(var_a) >= mean_b + z * std::sqrt(var_b);
}

}  // namespace chieb
