#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "chieb/errors.hpp"
#include "chieb/gradest.hpp"
#include "chieb/marginal.hpp"

namespace chieb {

using nlohmann::json;

namespace {

// log g(x) = poly((x - center)/scale) - log_norm, polynomial coefficients in
// ascending order.
class LindseyGradientModel final : public GradientModel {
public:
    LindseyGradientModel(double a, double b, double center, double scale,
                         std::vector<double> coef, double log_norm)
        : a_(a), b_(b), center_(center), scale_(scale), coef_(std::move(coef)),
          log_norm_(log_norm) {}

    double lower() const override { return a_; }
    double upper() const override { return b_; }
    std::string method() const override { return "lindsey"; }

    GradientValue derivative(double x, int order) const override {
        if (order < 1 || order > 4) throw std::domain_error("derivative: order in 1..4");
        if (x >= a_ && x <= b_) return {poly_derivative(x, order), false};
        const double edge = x < a_ ? a_ : b_;
        double v = 0.0;
        if (order == 1) {
            v = poly_derivative(edge, 1) + poly_derivative(edge, 2) * (x - edge);
        } else if (order == 2) {
            v = poly_derivative(edge, 2);
        }
        return {v, true};
    }

    double density(double x) const override {
        const double xc = std::clamp(x, a_, b_);
        double logd = poly_derivative(xc, 0) - log_norm_;
        if (x != xc) {
            // log-linear tail continuation
            logd += poly_derivative(xc, 1) * (x - xc);
        }
        return std::exp(logd);
    }

    json to_json() const override {
        return json{{"method", "lindsey"},       {"interval", {a_, b_}},
                    {"center", center_},         {"scale", scale_},
                    {"coefficients", coef_},     {"log_norm", log_norm_}};
    }

private:
    double poly_derivative(double x, int order) const {
        const double t = (x - center_) / scale_;
        double acc = 0.0;
        for (std::size_t i = coef_.size(); i-- > static_cast<std::size_t>(order);) {
            double c = coef_[i];
            for (int r = 0; r < order; ++r) c *= static_cast<double>(i - r);
            acc = acc * t + c;
        }
        return acc / std::pow(scale_, order);
    }

    double a_, b_, center_, scale_;
    std::vector<double> coef_;
    double log_norm_;
};

}  // namespace

std::shared_ptr<GradientModel> fit_lindsey(const std::vector<double>& data,
                                           const FitConfig& cfg) {
    if (data.size() < 200) {
        throw insufficient_data_error("fit_lindsey: need at least 200 observations");
    }
    const int degree = std::max(4, cfg.basis_size);
    std::vector<double> sorted(data);
    std::sort(sorted.begin(), sorted.end());
    auto quant = [&](double q) {
        const double pos = q * (sorted.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const std::size_t j = std::min(i + 1, sorted.size() - 1);
        return sorted[i] + (pos - i) * (sorted[j] - sorted[i]);
    };
    const double a = quant(cfg.q_lo);
    const double b = quant(cfg.q_hi);
    if (!(b > a)) throw numerical_error("fit_lindsey: degenerate (constant) input");

    const int nbins = 120;
    const double width = (b - a) / nbins;
    std::vector<double> counts(nbins, 0.0), centers(nbins);
    std::size_t used = 0;
    for (int i = 0; i < nbins; ++i) centers[i] = a + (i + 0.5) * width;
    for (const double x : data) {
        if (x < a || x > b) continue;
        const int bin = std::min(nbins - 1, static_cast<int>((x - a) / width));
        counts[bin] += 1.0;
        ++used;
    }

    // standardized abscissa for conditioning
    const double center = 0.5 * (a + b);
    const double scale = 0.5 * (b - a);

    const int ncol = degree + 1;
    Eigen::MatrixXd X(nbins, ncol);
    for (int i = 0; i < nbins; ++i) {
        const double t = (centers[i] - center) / scale;
        double v = 1.0;
        for (int jcol = 0; jcol < ncol; ++jcol) {
            X(i, jcol) = v;
            v *= t;
        }
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(counts.data(), nbins);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(ncol);
    beta(0) = std::log(std::max(1e-8, y.mean()));

    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd eta = X * beta;
        eta = eta.array().min(50.0);  // guard exp overflow
        const Eigen::VectorXd mu = eta.array().exp();
        Eigen::MatrixXd XtWX = X.transpose() * mu.asDiagonal() * X;
        const Eigen::VectorXd grad = X.transpose() * (y - mu);
        XtWX += 1e-10 * Eigen::MatrixXd::Identity(ncol, ncol);
        const Eigen::VectorXd delta = XtWX.ldlt().solve(grad);
        if (!delta.allFinite()) throw numerical_error("fit_lindsey: singular IRLS system");
        beta += delta;
        if (delta.cwiseAbs().maxCoeff() < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw numerical_error("fit_lindsey: IRLS did not converge");

    // counts model: mu(x) = n * width * g(x)  =>  log g = poly - log(n width)
    const double log_norm = std::log(static_cast<double>(used) * width);
    std::vector<double> coef(beta.data(), beta.data() + ncol);
    return std::make_shared<LindseyGradientModel>(a, b, center, scale, std::move(coef),
                                                  log_norm);
}

std::shared_ptr<GradientModel> lindsey_gradient_model_from_json(const json& j) {
    const auto iv = j.at("interval").get<std::vector<double>>();
    return std::make_shared<LindseyGradientModel>(
        iv.at(0), iv.at(1), j.at("center").get<double>(), j.at("scale").get<double>(),
        j.at("coefficients").get<std::vector<double>>(), j.at("log_norm").get<double>());
}

std::shared_ptr<GradientModel> GradientModel::from_json(const json& j) {
    const std::string method = j.at("method").get<std::string>();
    if (method == "exact") return exact_gradient_model_from_json(j);
    if (method == "score_matching") return spline_gradient_model_from_json(j);
    if (method == "lindsey") return lindsey_gradient_model_from_json(j);
    throw config_error("GradientModel::from_json: unknown method '" + method + "'");
}

}  // namespace chieb
