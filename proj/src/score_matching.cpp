#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bspline.hpp"
#include "chieb/errors.hpp"
#include "chieb/gradest.hpp"

namespace chieb {

using nlohmann::json;
using detail::BSplineBasis;

namespace {

constexpr int kDegree = 5;  // quintic: C^4, four usable derivatives
constexpr double kPositivityFloor = 1e-3;

double quantile_of(std::vector<double> sorted, double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const std::size_t j = std::min(i + 1, sorted.size() - 1);
    const double t = pos - i;
    return sorted[i] + t * (sorted[j] - sorted[i]);
}

std::vector<double> make_knots(double a, double b, int basis_size, bool log_scale) {
    const int interior = basis_size - kDegree - 1;
    std::vector<double> knots;
    for (int i = 0; i <= kDegree; ++i) knots.push_back(a);
    for (int i = 1; i <= interior; ++i) {
        const double t = static_cast<double>(i) / (interior + 1);
        if (log_scale) {
            knots.push_back(std::exp(std::log(a) + t * (std::log(b) - std::log(a))));
        } else {
            knots.push_back(a + t * (b - a));
        }
    }
    for (int i = 0; i <= kDegree; ++i) knots.push_back(b);
    return knots;
}

class SplineGradientModel final : public GradientModel {
public:
    SplineGradientModel(BSplineBasis basis, std::vector<double> theta)
        : basis_(std::move(basis)), theta_(std::move(theta)) {}

    double lower() const override { return basis_.lower(); }
    double upper() const override { return basis_.upper(); }
    std::string method() const override { return "score_matching"; }

    GradientValue derivative(double x, int order) const override {
        if (order < 1 || order > 4) throw std::domain_error("derivative: order in 1..4");
        const double a = basis_.lower(), b = basis_.upper();
        if (x >= a && x <= b) {
            return {basis_.value(theta_, x, order - 1), false};
        }
        // Linear extrapolation of l'; constant l'', zero beyond.
        const double edge = x < a ? a : b;
        double v = 0.0;
        if (order == 1) {
            v = basis_.value(theta_, edge, 0) + basis_.value(theta_, edge, 1) * (x - edge);
        } else if (order == 2) {
            v = basis_.value(theta_, edge, 1);
        }
        return {v, true};
    }

    json to_json() const override {
        return json{{"method", "score_matching"},
                    {"interval", {basis_.lower(), basis_.upper()}},
                    {"degree", basis_.degree()},
                    {"knots", basis_.knots()},
                    {"coefficients", theta_}};
    }

    const BSplineBasis& basis() const { return basis_; }
    std::vector<double>& theta() { return theta_; }

private:
    BSplineBasis basis_;
    std::vector<double> theta_;
};

struct Moments {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    std::size_t n = 0;
};

// The data live on a truncated interval where the density does not vanish, so
// plain score matching picks up boundary terms from the integration by parts.
// A weight w with w(a) = w(b) = 0 cancels them exactly: minimizing
// E[w psi^2 / 2 + w psi' + w' psi] is minimized at psi = l' wherever w > 0.
Moments accumulate(const BSplineBasis& basis, const std::vector<double>& xs) {
    const int nb = basis.size();
    Moments m{Eigen::MatrixXd::Zero(nb, nb), Eigen::VectorXd::Zero(nb), xs.size()};
    const double a = basis.lower(), b = basis.upper();
    const double half = 0.5 * (b - a);
    std::vector<double> phi, dphi;
    for (const double x : xs) {
        const double w = (x - a) * (b - x) / (half * half);
        const double dw = (a + b - 2.0 * x) / (half * half);
        basis.eval(x, 0, phi);
        basis.eval(x, 1, dphi);
        Eigen::Map<const Eigen::VectorXd> p(phi.data(), nb), dp(dphi.data(), nb);
        m.G.noalias() += w * p * p.transpose();
        m.h += w * dp + dw * p;
    }
    return m;
}

// Minimizer of (1/n) sum [psi^2/2 + psi'] + rho ||theta||^2.
Eigen::VectorXd solve_theta(const Moments& m, double rho) {
    const int nb = static_cast<int>(m.G.rows());
    const double n = static_cast<double>(m.n);
    Eigen::MatrixXd A = m.G / n + 2.0 * rho * Eigen::MatrixXd::Identity(nb, nb);
    Eigen::VectorXd b = -m.h / n;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
        throw numerical_error("fit_score_matching: singular system");
    }
    Eigen::VectorXd theta = ldlt.solve(b);
    if (!theta.allFinite()) throw numerical_error("fit_score_matching: singular system");
    return theta;
}

double objective(const Moments& m, const Eigen::VectorXd& theta) {
    const double n = static_cast<double>(m.n);
    return 0.5 * theta.dot(m.G * theta) / n + theta.dot(m.h) / n;
}

}  // namespace

std::shared_ptr<GradientModel> fit_score_matching(const std::vector<double>& data,
                                                  const FitConfig& cfg) {
    if (cfg.basis_size < 4) throw config_error("fit_score_matching: basis_size >= 4");
    if (cfg.basis_size < kDegree + 1)
        throw config_error("fit_score_matching: basis_size must exceed the spline degree");
    if (cfg.cv_folds < 2) throw config_error("fit_score_matching: cv_folds >= 2");
    if (data.size() < 10 * static_cast<std::size_t>(cfg.basis_size)) {
        throw insufficient_data_error("fit_score_matching: need at least 10*basis_size points");
    }

    std::vector<double> sorted(data);
    std::sort(sorted.begin(), sorted.end());
    const double a = quantile_of(sorted, cfg.q_lo);
    const double b = quantile_of(sorted, cfg.q_hi);
    if (!(b > a)) throw insufficient_data_error("fit_score_matching: degenerate data range");
    if (cfg.log_knots && a <= 0.0)
        throw data_error("fit_score_matching: log knot grid requires positive data");

    BSplineBasis basis(make_knots(a, b, cfg.basis_size, cfg.log_knots), kDegree);

    std::vector<double> xs;
    xs.reserve(data.size());
    for (const double x : sorted) {
        if (x >= a && x <= b) xs.push_back(x);
    }

    double rho = cfg.penalty;
    if (rho < 0.0) {
        // K-fold CV over 10 log-spaced candidates; ties go to the smoother fit.
        std::vector<double> rhos;
        for (int i = 0; i < 10; ++i) {
            rhos.push_back(std::pow(10.0, -6.0 + 7.0 * i / 9.0));
        }
        std::vector<std::size_t> idx(xs.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(cfg.seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        const int K = cfg.cv_folds;
        std::vector<Moments> folds;
        for (int f = 0; f < K; ++f) {
            std::vector<double> part;
            for (std::size_t i = f; i < idx.size(); i += K) part.push_back(xs[idx[i]]);
            folds.push_back(accumulate(basis, part));
        }
        Moments total = folds[0];
        for (int f = 1; f < K; ++f) {
            total.G += folds[f].G;
            total.h += folds[f].h;
            total.n += folds[f].n;
        }
        double best_score = std::numeric_limits<double>::infinity();
        bool any = false;
        for (const double r : rhos) {
            double score = 0.0;
            bool ok = true;
            for (int f = 0; f < K; ++f) {
                Moments train{total.G - folds[f].G, total.h - folds[f].h,
                              total.n - folds[f].n};
                try {
                    const Eigen::VectorXd th = solve_theta(train, r);
                    score += objective(folds[f], th);
                } catch (const numerical_error&) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            score /= K;
            if (score <= best_score + 1e-12) {  // ties -> larger rho
                best_score = score;
                rho = r;
                any = true;
            }
        }
        if (!any) throw numerical_error("fit_score_matching: all CV candidates singular");
    }

    const Moments all = accumulate(basis, xs);
    Eigen::VectorXd theta = solve_theta(all, rho);

    // Positivity floor on 1 + 2 psi over the evaluation grid; clip the grid
    // values and refit the spline through them when violated.
    const int grid_n = 400;
    std::vector<double> grid(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        const double t = static_cast<double>(i) / (grid_n - 1);
        grid[i] = cfg.log_knots
                      ? std::exp(std::log(a) + t * (std::log(b) - std::log(a)))
                      : a + t * (b - a);
    }
    const double psi_floor = 0.5 * (kPositivityFloor - 1.0);
    std::vector<double> coef(theta.data(), theta.data() + theta.size());
    for (int pass = 0; pass < 4; ++pass) {
        bool violated = false;
        std::vector<double> target(grid_n);
        for (int i = 0; i < grid_n; ++i) {
            double v = basis.value(coef, grid[i], 0);
            if (v < psi_floor) {
                v = psi_floor;
                violated = true;
            }
            target[i] = v;
        }
        if (!violated) break;
        // least-squares re-smoothing through the clipped values
        const int nb = basis.size();
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
        std::vector<double> phi;
        for (int i = 0; i < grid_n; ++i) {
            basis.eval(grid[i], 0, phi);
            Eigen::Map<const Eigen::VectorXd> p(phi.data(), nb);
            A.noalias() += p * p.transpose();
            rhs += target[i] * p;
        }
        A += 1e-9 * Eigen::MatrixXd::Identity(nb, nb);
        const Eigen::VectorXd th2 = A.ldlt().solve(rhs);
        std::copy(th2.data(), th2.data() + nb, coef.begin());
    }
    // Hard guarantee: by the convex-hull property a B-spline is bounded below
    // by its smallest local coefficient, so flooring the coefficients floors
    // psi everywhere on the interval.
    for (double& c : coef) c = std::max(c, psi_floor);

    return std::make_shared<SplineGradientModel>(std::move(basis), std::move(coef));
}

std::shared_ptr<GradientModel> spline_gradient_model_from_json(const json& j) {
    BSplineBasis basis(j.at("knots").get<std::vector<double>>(), j.at("degree").get<int>());
    return std::make_shared<SplineGradientModel>(
        std::move(basis), j.at("coefficients").get<std::vector<double>>());
}

}  // namespace chieb
