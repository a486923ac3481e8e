#include "chieb/quadrature.hpp"

#include <cmath>

#include "chieb/errors.hpp"

namespace chieb {

namespace {

// Kronrod-15 nodes/weights on [-1, 1]; Gauss-7 weights at the odd positions.
const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.0};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct Panel {
    double integral;
    double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double res_g = fc * kWg[3];
    double res_k = fc * kWgk[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double fv = f(c - dx) + f(c + dx);
        res_k += fv * kWgk[i];
        if (i % 2 == 1) res_g += fv * kWg[i / 2];
    }
    res_g *= h;
    res_k *= h;
    return {res_k, std::fabs(res_k - res_g)};
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol,
           int depth, int max_depth, double& acc) {
    const Panel p = gk15(f, a, b);
    if (p.error <= tol || depth >= max_depth) {
        if (depth >= max_depth && p.error > 1e3 * tol) {
            throw numerical_error("integrate: adaptive quadrature did not converge");
        }
        acc += p.integral;
        return;
    }
    const double c = 0.5 * (a + b);
    adapt(f, a, c, 0.5 * tol, depth + 1, max_depth, acc);
    adapt(f, c, b, 0.5 * tol, depth + 1, max_depth, acc);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const Panel whole = gk15(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::fabs(whole.integral));
    if (whole.error <= tol) return whole.integral;
    double acc = 0.0;
    adapt(f, a, b, tol, 0, max_depth, acc);
    return acc;
}

}  // namespace chieb
