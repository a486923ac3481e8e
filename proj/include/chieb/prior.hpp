#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace chieb {

// Prior on the non-centrality parameter lambda >= 0. Exponential(rate) is
// held as Gamma(1, 1/rate) so every continuous evaluation runs through the
// gamma path; the original kind is kept for serialization.
class PriorSpec {
public:
    enum class Kind { Gamma, Exponential, Degenerate, PointMassMixture, Tabulated };

    static PriorSpec gamma(double shape, double scale);
    static PriorSpec exponential(double rate);
    static PriorSpec degenerate(double lambda0);
    static PriorSpec point_mass_mixture(double pi0, PriorSpec base);
    static PriorSpec tabulated(std::vector<double> grid, std::vector<double> density);

    Kind kind() const { return kind_; }

    double gamma_shape() const { return shape_; }
    double gamma_scale() const { return scale_; }
    double degenerate_value() const { return lambda0_; }
    double pi0() const { return pi0_; }
    const PriorSpec& base() const { return *base_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& density() const { return density_; }

    // Atom at lambda = 0 (pi0 for mixtures, 1 for Degenerate(0), else 0).
    double mass_at_zero() const;

    double mean() const;
    double variance() const;

    // Continuous-part density (the atom excluded).
    double density_at(double lambda) const;
    // Upper quantile of the full prior; used to pick quadrature domains.
    double quantile(double p) const;

    double sample(std::mt19937_64& rng) const;

    nlohmann::json to_json() const;
    static PriorSpec from_json(const nlohmann::json& j);

private:
    PriorSpec() = default;
    void validate() const;

    Kind kind_ = Kind::Degenerate;
    double shape_ = 0.0, scale_ = 0.0;  // gamma parameters (also for Exponential)
    double rate_ = 0.0;                 // original exponential rate
    double lambda0_ = 0.0;
    double pi0_ = 0.0;
    std::shared_ptr<const PriorSpec> base_;
    std::vector<double> grid_, density_, cum_;  // tabulated
};

}  // namespace chieb
