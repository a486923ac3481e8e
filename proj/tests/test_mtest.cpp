#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "chieb/errors.hpp"
#include "chieb/mtest.hpp"
#include "chieb/specfun.hpp"

using namespace chieb;
using doctest::Approx;

namespace {

Battery make_battery(const std::vector<double>& xs, double k) {
    Battery b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        b.records.push_back({"t" + std::to_string(i), xs[i], k, std::nullopt, std::nullopt});
    }
    return b;
}

// Independent step-up formulation: the BH threshold is the largest p value t
// with #{p <= t} >= m t / alpha ... i.e. t <= #{p <= t} alpha / m.
std::vector<std::size_t> bh_reference(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    double best = -1.0;
    for (const double t : p) {
        std::size_t count = 0;
        for (const double q : p) {
            if (q <= t) ++count;
        }
        if (t <= count * alpha / m) best = std::max(best, t);
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m; ++i) {
        if (best >= 0.0 && p[i] <= best) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_SUITE("mtest") {

TEST_CASE("battery validation") {
    Battery b = make_battery({3.0, 5.0}, 7.0);
    b.validate();
    Battery dup = b;
    dup.records[1].id = dup.records[0].id;
    CHECK_THROWS_AS(dup.validate(), data_error);
    Battery neg = b;
    neg.records[0].x = 0.0;
    CHECK_THROWS_AS(neg.validate(), data_error);
    Battery badk = b;
    badk.records[0].k = -1.0;
    CHECK_THROWS_AS(badk.validate(), data_error);
}

TEST_CASE("p values are the central survival function") {
    const Battery b = make_battery({3.0, 14.0671}, 7.0);
    const auto p = p_values(b);
    CHECK(p[0] == Approx(specfun::chisq_sf(3.0, 7.0)).epsilon(1e-14));
    CHECK(p[1] == Approx(0.05).epsilon(1e-4));
}

TEST_CASE("bh hand example") {
    // m = 5, alpha = 0.25: thresholds 0.05, 0.10, 0.15, 0.20, 0.25
    const std::vector<double> p = {0.01, 0.08, 0.30, 0.12, 0.9};
    const auto res = bh_select(p, 0.25);
    CHECK(res.count == 3);
    CHECK(res.rejected == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("bh trivial cases") {
    CHECK(bh_select(std::vector<double>{}, 0.1).count == 0);
    CHECK(bh_select({0.9, 0.8}, 0.1).count == 0);
    const auto all = bh_select({1e-6, 1e-7, 1e-8}, 0.1);
    CHECK(all.count == 3);
    CHECK_THROWS_AS(bh_select({0.5}, 0.0), config_error);
    CHECK_THROWS_AS(bh_select({0.5}, 1.0), config_error);
    // ties at the threshold all rejected
    const auto tie = bh_select({0.02, 0.02, 0.9, 0.9, 0.9}, 0.05);
    CHECK(tie.count == 2);
}

TEST_CASE("bh matches an independent formulation on random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rng() % 8;
        std::vector<double> p(m);
        for (double& v : p) v = std::pow(u(rng), 1.0 + 3.0 * u(rng));
        const double alpha = 0.05 + 0.9 * u(rng);
        if (alpha >= 1.0) continue;
        CHECK(bh_select(p, alpha).rejected == bh_reference(p, alpha));
    }
}

TEST_CASE("bh is monotone in alpha") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(50);
    for (double& v : p) v = std::pow(u(rng), 2.0);
    std::size_t prev = 0;
    for (double alpha = 0.01; alpha < 1.0; alpha += 0.05) {
        const auto res = bh_select(p, alpha);
        CHECK(res.count >= prev);
        prev = res.count;
    }
}

TEST_CASE("battery form reports ids and the statistic cutoff") {
    Battery b = make_battery({30.0, 2.0, 45.0, 3.0}, 7.0);
    const auto res = bh_select(b, 0.05);
    CHECK(res.count == 2);
    CHECK(res.cutoff_x == Approx(30.0));
    CHECK(std::find(res.rejected_ids.begin(), res.rejected_ids.end(), "t0") !=
          res.rejected_ids.end());
    CHECK(std::find(res.rejected_ids.begin(), res.rejected_ids.end(), "t2") !=
          res.rejected_ids.end());
}

TEST_CASE("empirical fdr") {
    Battery b = make_battery({30.0, 45.0, 50.0, 2.0}, 7.0);
    b.records[0].is_null = true;
    b.records[1].is_null = false;
    b.records[2].is_null = false;
    b.records[3].is_null = true;
    const auto res = bh_select(b, 0.05);
    REQUIRE(res.count == 3);
    const auto e = empirical_fdr(res, b);
    CHECK(e.fdr == Approx(1.0 / 3.0));
    CHECK(e.true_positives == 2);

    BhResult empty;
    CHECK(empirical_fdr(empty, b).fdr == 0.0);
    Battery nolabel = make_battery({30.0, 45.0, 50.0, 2.0}, 7.0);
    CHECK_THROWS_AS(empirical_fdr(res, nolabel), data_error);
}

TEST_CASE("posterior significance boundary") {
    // k z^2_{0.95} = 7 * 1.6449^2 = 18.9386
    CHECK_FALSE(posterior_significance(18.90, 7.0, 0.1));
    CHECK(posterior_significance(18.95, 7.0, 0.1));
    CHECK_FALSE(posterior_significance(0.0, 7.0, 0.1));
    CHECK_THROWS_AS(posterior_significance(-1.0, 7.0, 0.1), std::domain_error);
}

TEST_CASE("dominance relations") {
    // z_{0.975} = 1.96: 10 vs 5 with sd 2 -> 5 + 3.92 = 8.92
    CHECK(dominates(10.0, 5.0, 4.0, 0.05));
    CHECK_FALSE(dominates(8.0, 5.0, 4.0, 0.05));
    CHECK(interval_dominates(15.0, 1.0, 5.0, 4.0, 0.05));
    CHECK_FALSE(interval_dominates(10.0, 9.0, 5.0, 4.0, 0.05));
    CHECK_THROWS_AS(dominates(1.0, 1.0, -1.0, 0.05), std::domain_error);
}

TEST_CASE("interval dominance implies mean dominance and is transitive") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 500; ++rep) {
        const double ma = 40.0 * u(rng), mb = 40.0 * u(rng), mc = 40.0 * u(rng);
        const double va = 10.0 * u(rng), vb = 10.0 * u(rng), vc = 10.0 * u(rng);
        if (interval_dominates(ma, va, mb, vb, 0.05)) {
            CHECK(dominates(ma, mb, vb, 0.05));
            if (interval_dominates(mb, vb, mc, vc, 0.05)) {
                CHECK(interval_dominates(ma, va, mc, vc, 0.05));
            }
        }
    }
}

}  // TEST_SUITE
