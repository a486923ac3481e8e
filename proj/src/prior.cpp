#include "chieb/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "chieb/errors.hpp"
#include "chieb/specfun.hpp"

namespace chieb {

using nlohmann::json;

PriorSpec PriorSpec::gamma(double shape, double scale) {
    PriorSpec p;
    p.kind_ = Kind::Gamma;
    p.shape_ = shape;
    p.scale_ = scale;
    p.validate();
    return p;
}

PriorSpec PriorSpec::exponential(double rate) {
    PriorSpec p;
    p.kind_ = Kind::Exponential;
    p.rate_ = rate;
    p.shape_ = 1.0;
    p.scale_ = rate > 0.0 ? 1.0 / rate : 0.0;
    p.validate();
    return p;
}

PriorSpec PriorSpec::degenerate(double lambda0) {
    PriorSpec p;
    p.kind_ = Kind::Degenerate;
    p.lambda0_ = lambda0;
    p.validate();
    return p;
}

PriorSpec PriorSpec::point_mass_mixture(double pi0, PriorSpec base) {
    PriorSpec p;
    p.kind_ = Kind::PointMassMixture;
    p.pi0_ = pi0;
    p.base_ = std::make_shared<const PriorSpec>(std::move(base));
    p.validate();
    return p;
}

PriorSpec PriorSpec::tabulated(std::vector<double> grid, std::vector<double> density) {
    PriorSpec p;
    p.kind_ = Kind::Tabulated;
    p.grid_ = std::move(grid);
    p.density_ = std::move(density);
    p.validate();
    // Cumulative trapezoid masses for quantiles and sampling.
    p.cum_.assign(p.grid_.size(), 0.0);
    for (std::size_t i = 1; i < p.grid_.size(); ++i) {
        p.cum_[i] = p.cum_[i - 1] + 0.5 * (p.density_[i] + p.density_[i - 1]) *
                                        (p.grid_[i] - p.grid_[i - 1]);
    }
    return p;
}

void PriorSpec::validate() const {
    switch (kind_) {
        case Kind::Gamma:
            if (shape_ <= 0.0 || scale_ <= 0.0)
                throw config_error("PriorSpec: Gamma requires shape > 0 and scale > 0");
            break;
        case Kind::Exponential:
            if (rate_ <= 0.0) throw config_error("PriorSpec: Exponential requires rate > 0");
            break;
        case Kind::Degenerate:
            if (lambda0_ < 0.0) throw config_error("PriorSpec: Degenerate requires lambda0 >= 0");
            break;
        case Kind::PointMassMixture: {
            if (pi0_ < 0.0 || pi0_ > 1.0)
                throw config_error("PriorSpec: mixture requires pi0 in [0,1]");
            if (!base_) throw config_error("PriorSpec: mixture requires a base prior");
            if (base_->mass_at_zero() > 0.0)
                throw config_error("PriorSpec: mixture base must place no mass at 0");
            break;
        }
        case Kind::Tabulated: {
            if (grid_.size() < 2 || grid_.size() != density_.size())
                throw config_error("PriorSpec: tabulated grid/density size mismatch");
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                if (density_[i] < 0.0)
                    throw config_error("PriorSpec: tabulated density must be non-negative");
                if (i > 0 && grid_[i] <= grid_[i - 1])
                    throw config_error("PriorSpec: tabulated grid must be strictly increasing");
            }
            if (grid_.front() < 0.0)
                throw config_error("PriorSpec: tabulated grid must be non-negative");
            double mass = 0.0;
            for (std::size_t i = 1; i < grid_.size(); ++i) {
                mass += 0.5 * (density_[i] + density_[i - 1]) * (grid_[i] - grid_[i - 1]);
            }
            if (std::fabs(mass - 1.0) > 1e-6)
                throw config_error("PriorSpec: tabulated density must integrate to 1");
            break;
        }
    }
}

double PriorSpec::mass_at_zero() const {
    switch (kind_) {
        case Kind::Degenerate: return lambda0_ == 0.0 ? 1.0 : 0.0;
        case Kind::PointMassMixture: return pi0_;
        default: return 0.0;
    }
}

double PriorSpec::mean() const {
    switch (kind_) {
        case Kind::Gamma:
        case Kind::Exponential: return shape_ * scale_;
        case Kind::Degenerate: return lambda0_;
        case Kind::PointMassMixture: return (1.0 - pi0_) * base_->mean();
        case Kind::Tabulated: {
            double m = 0.0;
            for (std::size_t i = 1; i < grid_.size(); ++i) {
                m += 0.5 * (grid_[i] * density_[i] + grid_[i - 1] * density_[i - 1]) *
                     (grid_[i] - grid_[i - 1]);
            }
            return m;
        }
    }
    return 0.0;
}

double PriorSpec::variance() const {
    switch (kind_) {
        case Kind::Gamma:
        case Kind::Exponential: return shape_ * scale_ * scale_;
        case Kind::Degenerate: return 0.0;
        case Kind::PointMassMixture: {
            const double m = base_->mean();
            const double v = base_->variance();
            // var of mixture of atom at 0 and base
            return (1.0 - pi0_) * (v + m * m) - std::pow((1.0 - pi0_) * m, 2);
        }
        case Kind::Tabulated: {
            double m = mean(), m2 = 0.0;
            for (std::size_t i = 1; i < grid_.size(); ++i) {
                m2 += 0.5 * (grid_[i] * grid_[i] * density_[i] +
                             grid_[i - 1] * grid_[i - 1] * density_[i - 1]) *
                      (grid_[i] - grid_[i - 1]);
            }
            return m2 - m * m;
        }
    }
    return 0.0;
}

double PriorSpec::density_at(double lambda) const {
    if (lambda < 0.0) return 0.0;
    switch (kind_) {
        case Kind::Gamma:
        case Kind::Exponential: {
            if (lambda == 0.0) return shape_ < 1.0 ? std::numeric_limits<double>::infinity()
                                                   : (shape_ == 1.0 ? 1.0 / scale_ : 0.0);
            return std::exp((shape_ - 1.0) * std::log(lambda) - lambda / scale_ -
                            std::lgamma(shape_) - shape_ * std::log(scale_));
        }
        case Kind::Degenerate: return 0.0;
        case Kind::PointMassMixture: return (1.0 - pi0_) * base_->density_at(lambda);
        case Kind::Tabulated: {
            if (lambda < grid_.front() || lambda > grid_.back()) return 0.0;
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), lambda);
            const std::size_t i = std::max<std::size_t>(1, it - grid_.begin()) - 1;
            const std::size_t j = std::min(i + 1, grid_.size() - 1);
            if (i == j) return density_[i];
            const double t = (lambda - grid_[i]) / (grid_[j] - grid_[i]);
            return density_[i] + t * (density_[j] - density_[i]);
        }
    }
    return 0.0;
}

double PriorSpec::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("PriorSpec::quantile: p in (0,1)");
    switch (kind_) {
        case Kind::Gamma:
        case Kind::Exponential: {
            // invert the regularized gamma CDF by bisection
            double lo = 0.0, hi = shape_ * scale_ + 10.0 * std::sqrt(shape_) * scale_ + 10.0;
            auto cdf = [&](double t) {
                return specfun::lower_reg_gamma(shape_, t / scale_);
            };
            while (cdf(hi) < p) hi *= 2.0;
            for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
                const double m = 0.5 * (lo + hi);
                (cdf(m) < p ? lo : hi) = m;
            }
            return 0.5 * (lo + hi);
        }
        case Kind::Degenerate: return lambda0_;
        case Kind::PointMassMixture: {
            if (p <= pi0_) return 0.0;
            return base_->quantile((p - pi0_) / (1.0 - pi0_));
        }
        case Kind::Tabulated: {
            const double target = p * cum_.back();
            const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
            if (it == cum_.begin()) return grid_.front();
            if (it == cum_.end()) return grid_.back();
            const std::size_t i = it - cum_.begin();
            const double t = (target - cum_[i - 1]) / (cum_[i] - cum_[i - 1]);
            return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
        }
    }
    return 0.0;
}

double PriorSpec::sample(std::mt19937_64& rng) const {
    switch (kind_) {
        case Kind::Gamma:
        case Kind::Exponential: {
            std::gamma_distribution<double> d(shape_, scale_);
            return d(rng);
        }
        case Kind::Degenerate: return lambda0_;
        case Kind::PointMassMixture: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng) < pi0_) return 0.0;
            return base_->sample(rng);
        }
        case Kind::Tabulated: {
            std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
            return quantile(u(rng));
        }
    }
    return 0.0;
}

json PriorSpec::to_json() const {
    switch (kind_) {
        case Kind::Gamma:
            return json{{"kind", "gamma"}, {"shape", shape_}, {"scale", scale_}};
        case Kind::Exponential:
            return json{{"kind", "exponential"}, {"rate", rate_}};
        case Kind::Degenerate:
            return json{{"kind", "degenerate"}, {"lambda0", lambda0_}};
        case Kind::PointMassMixture:
            return json{{"kind", "point_mass_mixture"}, {"pi0", pi0_},
                        {"base", base_->to_json()}};
        case Kind::Tabulated:
            return json{{"kind", "tabulated"}, {"grid", grid_}, {"density", density_}};
    }
    return json{};
}

PriorSpec PriorSpec::from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gamma") return gamma(j.at("shape").get<double>(), j.at("scale").get<double>());
    if (kind == "exponential") return exponential(j.at("rate").get<double>());
    if (kind == "degenerate") return degenerate(j.at("lambda0").get<double>());
    if (kind == "point_mass_mixture")
        return point_mass_mixture(j.at("pi0").get<double>(), from_json(j.at("base")));
    if (kind == "tabulated")
        return tabulated(j.at("grid").get<std::vector<double>>(),
                         j.at("density").get<std::vector<double>>());
    throw config_error("PriorSpec::from_json: unknown kind '" + kind + "'");
}

}  // namespace chieb
