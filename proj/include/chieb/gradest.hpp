#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "chieb/gradient_model.hpp"

namespace chieb {

struct FitConfig {
    int basis_size = 12;        // spline basis functions / Lindsey polynomial degree
    double penalty = -1.0;      // ridge weight; < 0 selects by cross-validation
    int cv_folds = 5;
    double q_lo = 0.005;        // fitting interval quantiles
    double q_hi = 0.995;
    std::uint64_t seed = 0;     // CV fold assignment
    bool log_knots = true;      // knot grid in log x (set false for z-scale data)
};

// Penalized least-squares score matching: psi(x) ~ l'(x) on a quintic
// B-spline basis, higher orders by differentiating the basis. Enforces
// 1 + 2 psi >= 1e-3 on the evaluation grid by clip-and-refit.
std::shared_ptr<GradientModel> fit_score_matching(const std::vector<double>& data,
                                                  const FitConfig& cfg);

// Lindsey's method: Poisson regression of histogram counts on a polynomial in
// x. Produces a usable density estimate; its derivatives are known to be much
// rougher than the score-matching ones.
std::shared_ptr<GradientModel> fit_lindsey(const std::vector<double>& data,
                                           const FitConfig& cfg);

std::shared_ptr<GradientModel> spline_gradient_model_from_json(const nlohmann::json& j);
std::shared_ptr<GradientModel> lindsey_gradient_model_from_json(const nlohmann::json& j);

}  // namespace chieb
