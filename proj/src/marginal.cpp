#include "chieb/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "chieb/errors.hpp"
#include "chieb/quadrature.hpp"

namespace chieb {

using nlohmann::json;
using specfun::SignedLog;

double formal_chisq_density(double x, double m) {
    const SignedLog sl = log_formal_chisq_density(x, m);
    return sl.sign * std::exp(sl.log_abs);
}

SignedLog log_formal_chisq_density(double x, double m) {
    if (x <= 0.0) throw std::domain_error("formal_chisq_density: requires x > 0");
    if (specfun::is_gamma_half_pole(m)) {
        throw pole_error("formal_chisq_density: pole at non-positive even df");
    }
    const double h = 0.5 * m;
    const SignedLog lg = specfun::log_gamma_signed(h);
    const double log_abs = (h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - lg.log_abs;
    return {log_abs, lg.sign};
}

namespace {

constexpr double kWeightResidual = 1e-12;
constexpr int kMaxWeights = 5000;

std::vector<double> mixture_weights(const PriorSpec& prior) {
    std::vector<double> w;
    switch (prior.kind()) {
        case PriorSpec::Kind::Gamma:
        case PriorSpec::Kind::Exponential: {
            // Negative binomial: the Poisson(lambda/2) count under a
            // Gamma(shape, scale) prior on lambda.
            const double alpha = prior.gamma_shape();
            const double beta = prior.gamma_scale();
            const double q = (beta / 2.0) / (1.0 + beta / 2.0);
            double pj = std::pow(1.0 - q, alpha);
            double mass = 0.0;
            for (int j = 0; j < kMaxWeights; ++j) {
                w.push_back(pj);
                mass += pj;
                if (1.0 - mass < kWeightResidual) break;
                pj *= q * (alpha + j) / (j + 1.0);
            }
            break;
        }
        case PriorSpec::Kind::Degenerate: {
            const double mu = 0.5 * prior.degenerate_value();
            if (mu == 0.0) {
                w.push_back(1.0);
                break;
            }
            double pj = std::exp(-mu);
            double mass = 0.0;
            for (int j = 0; j < kMaxWeights; ++j) {
                w.push_back(pj);
                mass += pj;
                if (1.0 - mass < kWeightResidual) break;
                pj *= mu / (j + 1.0);
            }
            break;
        }
        case PriorSpec::Kind::PointMassMixture: {
            w = mixture_weights(prior.base());
            for (double& v : w) v *= 1.0 - prior.pi0();
            if (w.empty()) w.push_back(0.0);
            w[0] += prior.pi0();
            break;
        }
        case PriorSpec::Kind::Tabulated: {
            const double lo = prior.grid().front();
            const double hi = prior.grid().back();
            double mass = 0.0;
            for (int j = 0; j < kMaxWeights; ++j) {
                const auto integrand = [&](double lam) {
                    const double mu = 0.5 * lam;
                    const double logp =
                        mu > 0.0 ? -mu + j * std::log(mu) - std::lgamma(j + 1.0)
                                 : (j == 0 ? 0.0 : -std::numeric_limits<double>::infinity());
                    return std::exp(logp) * prior.density_at(lam);
                };
                const double pj = integrate(integrand, lo, hi, 1e-11, 1e-16);
                w.push_back(std::max(0.0, pj));
                mass += w.back();
                if (1.0 - mass < kWeightResidual) break;
            }
            break;
        }
    }
    return w;
}

}  // namespace

MarginalModel::MarginalModel(PriorSpec prior, double k)
    : prior_(std::move(prior)), k_(k) {
    if (k_ <= 0.0 && specfun::is_gamma_half_pole(k_)) {
        throw pole_error("MarginalModel: k is a non-positive even integer");
    }
    weights_ = mixture_weights(prior_);
}

SignedLog MarginalModel::log_marginal_density(double x, int df_shift) const {
    if (x <= 0.0) throw std::domain_error("marginal_density: requires x > 0");
    const double base_df = k_ - 2.0 * df_shift;
    if (specfun::is_gamma_half_pole(base_df)) {
        throw pole_error("marginal_density: shifted df hits a Gamma pole");
    }
    // Signed log-sum-exp over the weight series.
    std::vector<double> logs(weights_.size());
    std::vector<int> signs(weights_.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (weights_[j] <= 0.0) {
            logs[j] = -std::numeric_limits<double>::infinity();
            signs[j] = 0;
            continue;
        }
        const SignedLog f = log_formal_chisq_density(x, base_df + 2.0 * j);
        logs[j] = std::log(weights_[j]) + f.log_abs;
        signs[j] = f.sign;
        max_log = std::max(max_log, logs[j]);
    }
    if (!std::isfinite(max_log)) return {-std::numeric_limits<double>::infinity(), 0};
    double acc = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (signs[j] != 0) acc += signs[j] * std::exp(logs[j] - max_log);
    }
    if (acc == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    return {max_log + std::log(std::fabs(acc)), acc > 0.0 ? 1 : -1};
}

double MarginalModel::marginal_density(double x, int df_shift) const {
    const SignedLog sl = log_marginal_density(x, df_shift);
    return sl.sign * std::exp(sl.log_abs);
}

double MarginalModel::marginal_cdf(double x) const {
    if (x <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (weights_[j] > 0.0) acc += weights_[j] * specfun::chisq_cdf(x, k_ + 2.0 * j);
    }
    return std::min(1.0, acc);
}

double MarginalModel::marginal_quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("marginal_quantile: p in (0,1)");
    double lo = 0.0, hi = k_ + 2.0 * weights_.size() + 100.0;
    while (marginal_cdf(hi) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw numerical_error("marginal_quantile: bracketing failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + hi); ++it) {
        const double m = 0.5 * (lo + hi);
        (marginal_cdf(m) < p ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

MarginalModel::LogGradients MarginalModel::exact_gradients_at(double x) const {
    const SignedLog g0 = log_marginal_density(x, 0);
    auto ratio = [&](int shift) {
        const SignedLog gs = log_marginal_density(x, shift);
        return gs.sign * g0.sign * std::exp(gs.log_abs - g0.log_abs);
    };
    const double r2 = ratio(1);
    const double r4 = ratio(2);
    const double r6 = ratio(3);
    const double r8 = ratio(4);
    LogGradients g{};
    g.d1 = 0.5 * (r2 - 1.0);
    g.d2 = 0.25 * (r4 - r2 * r2);
    g.d3 = 0.125 * (r6 - 12.0 * g.d2 * r2 - r2 * r2 * r2);
    g.d4 = (r8 - 32.0 * g.d3 * r2 - 24.0 * g.d2 * r2 * r2 - 48.0 * g.d2 * g.d2 -
            r2 * r2 * r2 * r2) / 16.0;
    return g;
}

std::vector<HierDraw> MarginalModel::sample(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<HierDraw> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        HierDraw d{};
        d.lambda = prior_.sample(rng);
        if (d.lambda > 0.0) {
            std::poisson_distribution<int> pj(0.5 * d.lambda);
            d.j = pj(rng);
        } else {
            d.j = 0;
        }
        std::chi_squared_distribution<double> cx(k_ + 2.0 * d.j);
        d.x = cx(rng);
        out.push_back(d);
    }
    return out;
}

MarginalModel::PosteriorMoments MarginalModel::oracle_posterior(double x) const {
    if (x <= 0.0) throw std::domain_error("oracle_posterior: requires x > 0");
    if (prior_.kind() == PriorSpec::Kind::Degenerate) {
        const double l0 = prior_.degenerate_value();
        return {l0, l0 * l0, 0.0};
    }
    const double pi0 = prior_.mass_at_zero();
    if (pi0 >= 1.0) return {0.0, 0.0, 0.0};

    double lo = 0.0, hi;
    if (prior_.kind() == PriorSpec::Kind::Tabulated) {
        lo = prior_.grid().front();
        hi = prior_.grid().back();
    } else {
        hi = std::max(prior_.quantile(1.0 - 1e-13), 2.0 * x + 20.0 * std::sqrt(x) + 100.0);
    }
    auto moment = [&](int r) {
        const auto f = [&](double lam) {
            const double d = prior_.density_at(lam);
            if (d <= 0.0) return 0.0;
            return std::pow(lam, r) * specfun::noncentral_chisq_pdf(x, k_, lam) * d;
        };
        const double mid = std::min(std::max(x, lo + 1e-8), hi);
        double acc = integrate(f, lo, mid, 1e-10, 1e-300);
        if (mid < hi) acc += integrate(f, mid, hi, 1e-10, 1e-300);
        return acc;
    };
    const double den = pi0 * specfun::chisq_pdf(x, k_) + moment(0);
    if (den <= 0.0) throw numerical_error("oracle_posterior: vanishing marginal density");
    const double m1 = moment(1) / den;
    const double m2 = moment(2) / den;
    return {m1, m2, m2 - m1 * m1};
}

namespace {

class ExactGradientModel final : public GradientModel {
public:
    explicit ExactGradientModel(std::shared_ptr<const MarginalModel> m) : model_(std::move(m)) {}

    double lower() const override { return 0.0; }
    double upper() const override { return std::numeric_limits<double>::infinity(); }
    std::string method() const override { return "exact"; }

    GradientValue derivative(double x, int order) const override {
        if (order < 1 || order > 4) throw std::domain_error("derivative: order in 1..4");
        const auto g = model_->exact_gradients_at(x);
        const double v = order == 1 ? g.d1 : order == 2 ? g.d2 : order == 3 ? g.d3 : g.d4;
        return {v, false};
    }

    double density(double x) const override { return model_->marginal_density(x); }

    json to_json() const override {
        return json{{"method", "exact"},
                    {"k", model_->df()},
                    {"prior", model_->prior().to_json()}};
    }

private:
    std::shared_ptr<const MarginalModel> model_;
};

}  // namespace

std::shared_ptr<GradientModel> MarginalModel::exact_log_gradients() const {
    return std::make_shared<ExactGradientModel>(std::make_shared<MarginalModel>(*this));
}

std::shared_ptr<GradientModel> exact_gradient_model_from_json(const json& j) {
    auto model = std::make_shared<MarginalModel>(PriorSpec::from_json(j.at("prior")),
                                                 j.at("k").get<double>());
    return model->exact_log_gradients();
}

double GradientModel::density(double) const {
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace chieb
