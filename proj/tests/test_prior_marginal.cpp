#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "chieb/errors.hpp"
#include "chieb/marginal.hpp"
#include "chieb/prior.hpp"
#include "chieb/quadrature.hpp"
#include "chieb/specfun.hpp"

using namespace chieb;
using doctest::Approx;

TEST_SUITE("model") {

TEST_CASE("formal density closed form and pole") {
    CHECK(formal_chisq_density(2.0, 2.0) == Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(formal_chisq_density(1.0, 0.0), pole_error);
    CHECK_THROWS_AS(formal_chisq_density(1.0, -2.0), pole_error);
    // negative non-even df: sign carried through the Gamma reflection
    CHECK(formal_chisq_density(2.0, -1.0) < 0.0);
}

TEST_CASE("formal density derivative identity (Lemma 1 kernel)") {
    const double x = 5.0, m = 7.0, h = 1e-5;
    const double d = (formal_chisq_density(x + h, m) - formal_chisq_density(x - h, m)) /
                     (2.0 * h);
    const double rhs = 0.5 * (formal_chisq_density(x, m - 2.0) - formal_chisq_density(x, m));
    CHECK(d == Approx(rhs).epsilon(1e-6));
}

TEST_CASE("formal density recurrence") {
    // x f_m(x) = m f_{m+2}(x), exercised at m-4+2j with m=7, j=2, x=3
    const double x = 3.0, m = 7.0;
    const int j = 2;
    CHECK(x * formal_chisq_density(x, m - 4.0 + 2 * j) ==
          Approx((m - 4.0 + 2 * j) * formal_chisq_density(x, m - 2.0 + 2 * j))
              .epsilon(1e-10));
}

TEST_CASE("prior validation") {
    CHECK_THROWS_AS(PriorSpec::gamma(-1.0, 2.0), config_error);
    CHECK_THROWS_AS(PriorSpec::exponential(0.0), config_error);
    CHECK_THROWS_AS(PriorSpec::degenerate(-3.0), config_error);
    CHECK_THROWS_AS(PriorSpec::point_mass_mixture(1.5, PriorSpec::gamma(2.0, 10.0)),
                    config_error);
    // mixture base may not put mass at zero
    CHECK_THROWS_AS(PriorSpec::point_mass_mixture(0.5, PriorSpec::degenerate(0.0)),
                    config_error);
    // tabulated grid must increase and integrate to one
    CHECK_THROWS_AS(PriorSpec::tabulated({1.0, 1.0, 2.0}, {0.1, 0.2, 0.1}), config_error);
    CHECK_THROWS_AS(PriorSpec::tabulated({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}), config_error);
}

TEST_CASE("prior moments and json round trip") {
    const PriorSpec g = PriorSpec::gamma(2.0, 10.0);
    CHECK(g.mean() == Approx(20.0));
    CHECK(g.variance() == Approx(200.0));
    const PriorSpec e = PriorSpec::exponential(0.25);
    CHECK(e.mean() == Approx(4.0));
    const PriorSpec mix = PriorSpec::point_mass_mixture(0.9, g);
    CHECK(mix.mass_at_zero() == Approx(0.9));
    CHECK(mix.mean() == Approx(2.0));
    for (const PriorSpec& p : {g, e, mix, PriorSpec::degenerate(6.0)}) {
        const PriorSpec back = PriorSpec::from_json(p.to_json());
        CHECK(back.kind() == p.kind());
        CHECK(back.mean() == Approx(p.mean()).epsilon(1e-12));
        CHECK(back.variance() == Approx(p.variance()).epsilon(1e-12));
    }
}

TEST_CASE("marginal of the null prior is the central density") {
    const MarginalModel m(PriorSpec::degenerate(0.0), 7.0);
    for (double x = 0.5; x < 40.0; x += 2.5) {
        CHECK(m.marginal_density(x) == Approx(specfun::chisq_pdf(x, 7.0)).epsilon(1e-12));
    }
}

TEST_CASE("mixture weights match the quadrature definition") {
    const PriorSpec prior = PriorSpec::gamma(2.0, 10.0);
    const MarginalModel m(prior, 7.0);
    const auto& w = m.weights();
    double sum = 0.0;
    for (const double p : w) sum += p;
    CHECK(sum == Approx(1.0).epsilon(1e-10));
    for (int j = 0; j < 6; ++j) {
        const double numeric = integrate(
            [&](double lam) {
                return std::exp(-0.5 * lam + j * std::log(0.5 * lam) -
                                specfun::log_gamma(j + 1.0)) *
                       prior.density_at(lam);
            },
            j == 0 ? 0.0 : 1e-12, prior.quantile(1.0 - 1e-13), 1e-12);
        CHECK(w[j] == Approx(numeric).epsilon(1e-9));
    }
}

TEST_CASE("Lemma 1 identity for the marginal") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const double h = 1e-5;
    for (double x = 2.0; x <= 60.0; x += 1.0) {
        const double g7 = m.marginal_density(x);
        const double g5 = m.marginal_density(x, 1);
        const double dg7 = (m.marginal_density(x + h) - m.marginal_density(x - h)) /
                           (2.0 * h);
        CHECK(std::fabs(g5 - (2.0 * dg7 + g7)) < 1e-8 * g7);
    }
}

TEST_CASE("exact gradients: central closed forms") {
    const MarginalModel m(PriorSpec::degenerate(0.0), 7.0);
    for (double x : {1.0, 5.0, 12.0, 30.0}) {
        const auto g = m.exact_gradients_at(x);
        CHECK(g.d1 == Approx((3.5 - 1.0) / x - 0.5).epsilon(1e-10));
        CHECK(g.d2 == Approx(-(3.5 - 1.0) / (x * x)).epsilon(1e-10));
    }
    // x = k - 2 zeroes the first derivative under the null
    CHECK(m.exact_gradients_at(5.0).d1 == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("one plus 2 l' crosses one near k") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    CHECK(1.0 + 2.0 * m.exact_gradients_at(2.0).d1 > 1.0);
    CHECK(1.0 + 2.0 * m.exact_gradients_at(40.0).d1 < 1.0);
    // crossing point sits between k and the marginal mean k + E[lambda]
    double cross = 0.0;
    for (double x = 2.0; x < 40.0; x += 0.05) {
        if (1.0 + 2.0 * m.exact_gradients_at(x).d1 < 1.0) {
            cross = x;
            break;
        }
    }
    CHECK(cross > 7.0);
    CHECK(cross < 27.0);
}

TEST_CASE("gradient model interface flags extrapolation never for exact") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto g = m.exact_log_gradients();
    CHECK(g->method() == "exact");
    CHECK_FALSE(g->derivative(500.0, 1).extrapolated);
    CHECK(g->density(20.0) == Approx(m.marginal_density(20.0)).epsilon(1e-12));
    CHECK_THROWS_AS(g->derivative(5.0, 5), std::domain_error);
}

TEST_CASE("sampler: null reduction and moment identities") {
    const MarginalModel null_m(PriorSpec::degenerate(0.0), 7.0);
    const std::size_t n = 50000;
    double mean = 0.0;
    for (const auto& d : null_m.sample(n, 11)) {
        CHECK(d.j == 0);
        CHECK(d.lambda == 0.0);
        mean += d.x;
    }
    mean /= n;
    CHECK(std::fabs(mean - 7.0) < 4.0 * std::sqrt(2.0 * 7.0 / n));

    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto draws = m.sample(n, 12);
    double mx = 0.0, m2 = 0.0;
    for (const auto& d : draws) mx += d.x;
    mx /= n;
    for (const auto& d : draws) m2 += (d.x - mx) * (d.x - mx);
    m2 /= (n - 1);
    const double want_mean = 7.0 + 20.0;               // k + E lambda
    const double want_var = 2.0 * 7.0 + 4.0 * 20.0 + 200.0;  // 2k + 4 E lambda + Var lambda
    CHECK(std::fabs(mx - want_mean) < 4.0 * std::sqrt(want_var / n));
    // MC se of the sample variance ~ sqrt(2/n) var for gaussians; allow a loose 10%
    CHECK(m2 == Approx(want_var).epsilon(0.1));
}

TEST_CASE("sampler agrees with the marginal cdf (KS)") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const std::size_t n = 50000;
    auto draws = m.sample(n, 5);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = draws[i].x;
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = m.marginal_cdf(xs[i]);
        ks = std::max(ks, std::fabs(F - (i + 1.0) / n));
        ks = std::max(ks, std::fabs(F - static_cast<double>(i) / n));
    }
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% critical value
}

TEST_CASE("sampler is deterministic per seed") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto a = m.sample(100, 99), b = m.sample(100, 99), c = m.sample(100, 98);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].x == c[i].x;
    CHECK_FALSE(same);
}

TEST_CASE("oracle posterior: degenerate and golden values") {
    const MarginalModel d6(PriorSpec::degenerate(6.0), 7.0);
    for (double x : {3.0, 10.0, 25.0}) {
        const auto p = d6.oracle_posterior(x);
        CHECK(p.mean == Approx(6.0).epsilon(1e-12));
        CHECK(p.variance == Approx(0.0).epsilon(1e-12));
    }
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    const auto p = m.oracle_posterior(20.0);
    // frozen goldens from an independent high-precision oracle
    CHECK(p.mean == Approx(15.086135399241898).epsilon(1e-8));
    CHECK(p.variance == Approx(47.574852313163658).epsilon(1e-8));

    const MarginalModel all_null(
        PriorSpec::point_mass_mixture(1.0, PriorSpec::gamma(2.0, 10.0)), 7.0);
    const auto q = all_null.oracle_posterior(15.0);
    CHECK(q.mean == Approx(0.0).epsilon(1e-12));
    CHECK(q.variance == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("log-concavity diagnostic for the Gamma marginal (Lemma 2)") {
    const MarginalModel m(PriorSpec::gamma(2.0, 10.0), 7.0);
    for (double x = 2.0; x <= 60.0; x += 1.0) {
        const double l1_k = m.exact_gradients_at(x).d1;
        // l'_{k-2} from the shifted densities
        const double h = 1e-5;
        const double l1_km2 = (std::log(m.marginal_density(x + h, 1)) -
                               std::log(m.marginal_density(x - h, 1))) /
                              (2.0 * h);
        CHECK(l1_k > l1_km2);
    }
}

}  // TEST_SUITE
