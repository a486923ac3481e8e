#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chieb/gradest.hpp"
#include "chieb/marginal.hpp"
#include "chieb/mtest.hpp"
#include "chieb/tweedie.hpp"

namespace chieb {

struct XorConfig {
    int n = 300;
    int p = 100;
    double noise_sd = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct XorData {
    int n = 0;
    int p = 0;
    std::vector<std::uint8_t> x;  // n * p, row-major Bernoulli(1/2) design
    std::vector<double> y;

    std::uint8_t at(int row, int col) const { return x[row * p + col]; }
};

// Two-module XOR response: pair {0,1} or parity triple {2,3,4} (0-based),
// chosen by a fair coin per row, plus N(0, noise_sd^2) noise.
XorData gen_xor(const XorConfig& cfg);

struct QStat {
    double q;
    double df;  // (#non-empty cells) - 1
};
// Sum of squared group-mean deviations over the 8 cells, scaled by the
// overall sample variance of y.
QStat q_statistic(const std::vector<double>& y, const std::vector<int>& group_of);

struct TripletResult {
    std::array<int, 3> idx;  // strictly increasing variable indices
    double q = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool selected = false;
    PosteriorSummary summary;  // filled for selected triplets
};

struct TripletScanResult {
    std::vector<TripletResult> results;  // ordered by (q desc, lexicographic)
    std::size_t selected_count = 0;
    double cutoff_q = 0.0;
};
TripletScanResult triplet_scan(const XorData& data, double alpha, const FitConfig& fit,
                               int threads = 0);

// Fit settings for the scan marginal: the signal triplets live in the extreme
// tail, so the interval runs to the sample maximum, the basis is finer, and
// the ridge weight is fixed (fold CV is dominated by the null bulk and
// over-smooths the tail).
FitConfig xor_fit_config(std::uint64_t seed);

struct Fig4Report {
    std::size_t reps = 0;
    double proposed_coverage = 0.0;
    double nt_coverage = 0.0;
};
Fig4Report run_fig4(std::size_t reps, std::uint64_t seed);

struct Fig5Report {
    std::size_t cases = 0;
    std::size_t selected = 0;
    std::size_t selected_nonnull = 0;
    double cutoff_x = 0.0;
    double empirical_fdr = 0.0;
    double coverage_proposed_exact = 0.0;   // among selected true non-nulls
    double coverage_proposed_fitted = 0.0;
    double coverage_nt = 0.0;
    double coverage_by = 0.0;
    double fcr_by = 0.0;  // among all selected
};
Fig5Report run_fig5(std::size_t cases, std::uint64_t seed);

struct CurveRow {
    double x;
    double one_plus_2l;   // 1 + 2 l'_k
    double two_layer;     // (1 + 2 l'_{k-2})(1 + 2 l'_k)
    double u, v, w;       // one-layer, two-layer, corrected value
};
std::vector<CurveRow> curve_emit(const MarginalModel& model,
                                 const std::vector<double>& x_grid);

// Deterministic per-task stream seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task);

}  // namespace chieb
