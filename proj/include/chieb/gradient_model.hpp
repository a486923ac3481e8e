#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace chieb {

struct GradientValue {
    double value = 0.0;
    bool extrapolated = false;
};

// Evaluator of the marginal log-likelihood derivatives l^(r), r = 1..4.
// Everything downstream of gradient estimation consumes this interface; the
// exact-prior evaluator and the fitted models implement it.
class GradientModel {
public:
    virtual ~GradientModel() = default;

    virtual double lower() const = 0;
    virtual double upper() const = 0;
    virtual std::string method() const = 0;

    // l^(order)(x), order in {1,2,3,4}. Outside [lower, upper] the declared
    // extrapolation rule applies and the result is flagged.
    virtual GradientValue derivative(double x, int order) const = 0;

    // Marginal density g_k(x) when the model carries one (exact and Lindsey
    // models do); returns NaN when unavailable.
    virtual double density(double x) const;

    virtual nlohmann::json to_json() const = 0;
    static std::shared_ptr<GradientModel> from_json(const nlohmann::json& j);
};

}  // namespace chieb
