#include <cmath>
#include <vector>

#include <doctest.h>

#include "chieb/errors.hpp"
#include "chieb/marginal.hpp"
#include "chieb/prior.hpp"
#include "chieb/specfun.hpp"
#include "chieb/tweedie.hpp"

using namespace chieb;
using doctest::Approx;

namespace {

// Direct mixture-representation oracle for E_{k-4}[4J(J-1) | x]: the tilted
// expectation weights j by p_j f_{k-4+2j}(x), formal densities allowed.
double factorial_moment_oracle(const MarginalModel& m, double x) {
    const auto& p = m.weights();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double w = p[j] * formal_chisq_density(x, m.df() - 4.0 + 2.0 * j);
        den += w;
        num += w * 4.0 * static_cast<double>(j) * (static_cast<double>(j) - 1.0);
    }
    return num / den;
}

}  // namespace

TEST_SUITE("tweedie") {

TEST_CASE("naive effect dof") {
    const auto e = naive_effect_dof(20.0, 7.0);
    CHECK(e.ml_style == Approx(17.0));
    CHECK(e.moment_style == Approx(15.0));
    const auto z = naive_effect_dof(1.0, 7.0);
    CHECK(z.ml_style == 0.0);
    CHECK(z.moment_style == 0.0);
    CHECK_THROWS_AS(naive_effect_dof(0.0, 7.0), std::domain_error);
}

TEST_CASE("central collapse: null gradients give a zero posterior") {
    const MarginalModel m(PriorSpec::degenerate(0.0), 7.0);
    const auto g = m.exact_log_gradients();
    for (double x : {2.0, 7.0, 15.0, 40.0}) {
        CHECK(posterior_mean(*g, x, 7.0) < 1e-10);
        CHECK(posterior_variance(*g, x, 7.0) < 1e-8);
    }
}

TEST_CASE("frozen goldens at x = 20 under the Gamma prior") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto g = m.exact_log_gradients();
    CHECK(posterior_effect_dof(*g, 20.0, 7.0) ==
          Approx(15.794219908410926).epsilon(1e-9));
    CHECK(second_factorial_moment(*g, 20.0, 7.0) ==
          Approx(306.56400986869709).epsilon(1e-9));
}

TEST_CASE("two algebraic forms of the mean agree") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto gm = m.exact_log_gradients();
    const double k = 7.0;
    for (double x = 3.0; x <= 60.0; x += 1.5) {
        const auto g = m.exact_gradients_at(x);
        const double r2 = 1.0 + 2.0 * g.d1;
        // layered form: x (1 + 2 l'_{k-2})(1 + 2 l'_k) - (k - 4)(1 + 2 l'_k)
        const double r2_km2 = (4.0 * g.d2 + r2 * r2) / r2;
        const double layered = x * r2_km2 * r2 - (k - 4.0) * r2;
        CHECK(posterior_mean(*gm, x, k) ==
              Approx(std::max(0.0, layered)).epsilon(1e-10).scale(1e-10));
    }
}

TEST_CASE("mean and variance match the quadrature oracle") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto g = m.exact_log_gradients();
    for (double x : {5.0, 10.0, 20.0, 40.0, 60.0}) {
        const auto o = m.oracle_posterior(x);
        CHECK(posterior_mean(*g, x, 7.0) == Approx(o.mean).epsilon(1e-8));
        CHECK(posterior_variance(*g, x, 7.0) == Approx(o.variance).epsilon(1e-6));
    }
}

TEST_CASE("second factorial moment across formal-density degrees") {
    for (double k : {3.0, 5.0, 7.0}) {
        const MarginalModel m(PriorSpec::gamma(2.0, 10.0), k);
        const auto g = m.exact_log_gradients();
        for (double x : {8.0, 20.0, 35.0}) {
            CHECK(second_factorial_moment(*g, x, k) ==
                  Approx(factorial_moment_oracle(m, x)).epsilon(1e-7));
        }
    }
}

TEST_CASE("second factorial moment under a degenerate prior") {
    const MarginalModel m(PriorSpec::degenerate(6.0), 7.0);
    const auto g = m.exact_log_gradients();
    for (double x : {5.0, 12.0, 25.0}) {
        CHECK(second_factorial_moment(*g, x, 7.0) ==
              Approx(factorial_moment_oracle(m, x)).epsilon(1e-7));
    }
}

TEST_CASE("local fdr golden and clamps") {
    const MarginalModel mix(
        PriorSpec::point_mass_mixture(0.9, PriorSpec::gamma(2.0, 10.0)), 7.0);
    const double x = 19.7273;
    CHECK(local_fdr(x, 7.0, 0.9, mix.marginal_density(x)) ==
          Approx(0.43075030524457659).epsilon(1e-9));
    CHECK(local_fdr(10.0, 7.0, 0.0, 0.05) == 0.0);
    // tiny marginal forces the [0,1] clamp
    CHECK(local_fdr(7.0, 7.0, 1.0, 1e-12) == 1.0);
    CHECK_THROWS_AS(local_fdr(10.0, 7.0, 1.5, 0.05), std::domain_error);
    CHECK_THROWS_AS(local_fdr(10.0, 7.0, 0.5, 0.0), std::domain_error);
}

TEST_CASE("null adjustment identities") {
    const auto id = adjust_for_null(12.0, 30.0, 0.0);
    CHECK(id.mean == Approx(12.0));
    CHECK(id.variance == Approx(30.0));
    CHECK_THROWS_AS(adjust_for_null(12.0, 30.0, 1.0), numerical_error);
    CHECK_THROWS_AS(adjust_for_null(12.0, 30.0, -0.1), std::domain_error);
    const auto clamped = adjust_for_null(10.0, 1.0, 0.5);
    CHECK(clamped.variance == 0.0);
    CHECK(clamped.clamped_variance);
}

TEST_CASE("null adjustment recovers the alternative-conditional oracle") {
    const PriorSpec alt = PriorSpec::gamma(2.0, 10.0);
    const MarginalModel mix(PriorSpec::point_mass_mixture(0.9, alt), 7.0);
    const MarginalModel pure(alt, 7.0);
    const auto g = mix.exact_log_gradients();
    for (double x : {15.0, 20.0, 30.0}) {
        const double fdr = local_fdr(x, 7.0, 0.9, mix.marginal_density(x));
        const auto adj = adjust_for_null(posterior_mean(*g, x, 7.0),
                                         posterior_variance(*g, x, 7.0), fdr);
        const auto o = pure.oracle_posterior(x);
        CHECK(adj.mean == Approx(o.mean).epsilon(1e-6));
        CHECK(adj.variance == Approx(o.variance).epsilon(1e-4));
    }
}

TEST_CASE("posterior interval construction") {
    const auto iv = posterior_interval(10.0, 4.0, 0.9);
    const double z = specfun::norm_quantile(0.95);
    CHECK(iv.lo == Approx(10.0 - 2.0 * z).epsilon(1e-12));
    CHECK(iv.hi == Approx(10.0 + 2.0 * z).epsilon(1e-12));
    const auto zero = posterior_interval(5.0, 0.0, 0.9);
    CHECK(zero.lo == 5.0);
    CHECK(zero.hi == 5.0);
    // lower endpoint floored at zero
    CHECK(posterior_interval(1.0, 9.0, 0.9).lo == 0.0);
    CHECK_THROWS_AS(posterior_interval(1.0, -1.0, 0.9), std::domain_error);
}

TEST_CASE("summarize pipeline") {
    const PriorSpec alt = PriorSpec::gamma(2.0, 10.0);
    const MarginalModel mix(PriorSpec::point_mass_mixture(0.9, alt), 7.0);
    const auto g = mix.exact_log_gradients();
    const auto s = summarize(*g, 20.0, 7.0, 0.9, 0.9);
    CHECK(s.fdr.has_value());
    CHECK(*s.fdr == Approx(local_fdr(20.0, 7.0, 0.9, mix.marginal_density(20.0)))
                        .epsilon(1e-10));
    CHECK(s.interval_lo <= s.mean);
    CHECK(s.mean <= s.interval_hi);
    // no pi0: raw mixture moments
    const auto raw = summarize(*g, 20.0, 7.0, 0.9);
    CHECK_FALSE(raw.fdr.has_value());
    CHECK(raw.mean < s.mean);
}

TEST_CASE("posterior mean is increasing in x") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto g = m.exact_log_gradients();
    double prev = -1.0;
    for (double x = 2.0; x <= 80.0; x += 0.5) {
        const double mu = posterior_mean(*g, x, 7.0);
        CHECK(mu >= prev - 1e-9);
        prev = mu;
    }
}

TEST_CASE("pi0 plug-in") {
    CHECK(estimate_pi0({0.6, 0.7, 0.2, 0.9}) == Approx(1.0));
    std::vector<double> ps;
    for (int i = 0; i < 1000; ++i) ps.push_back((i + 0.5) / 1000.0);
    for (int i = 0; i < 1000; ++i) ps.push_back(1e-4);  // signal block
    CHECK(estimate_pi0(ps) == Approx(0.5).epsilon(0.01));
    CHECK_THROWS_AS(estimate_pi0({}), insufficient_data_error);
}

}  // TEST_SUITE
