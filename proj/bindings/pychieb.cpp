#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "chieb/baselines.hpp"
#include "chieb/errors.hpp"
#include "chieb/experiments.hpp"
#include "chieb/gradest.hpp"
#include "chieb/marginal.hpp"
#include "chieb/mtest.hpp"
#include "chieb/prior.hpp"
#include "chieb/specfun.hpp"
#include "chieb/tweedie.hpp"

namespace py = pybind11;
using namespace chieb;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Empirical-Bayes effect-size estimation for chi-squared statistics";

    py::register_exception<pole_error>(m, "PoleError", PyExc_ValueError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<insufficient_data_error>(m, "InsufficientDataError",
                                                    PyExc_ValueError);
    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<data_error>(m, "DataError", PyExc_ValueError);

    // distributions
    m.def("chisq_pdf", &specfun::chisq_pdf, py::arg("x"), py::arg("k"));
    m.def("chisq_cdf", &specfun::chisq_cdf, py::arg("x"), py::arg("k"));
    m.def("chisq_sf", &specfun::chisq_sf, py::arg("x"), py::arg("k"));
    m.def("chisq_quantile", &specfun::chisq_quantile, py::arg("p"), py::arg("k"));
    m.def("noncentral_chisq_pdf", &specfun::noncentral_chisq_pdf, py::arg("x"),
          py::arg("k"), py::arg("lam"));
    m.def("noncentral_chisq_cdf", &specfun::noncentral_chisq_cdf, py::arg("x"),
          py::arg("k"), py::arg("lam"));
    m.def("noncentral_chisq_sf", &specfun::noncentral_chisq_sf, py::arg("x"),
          py::arg("k"), py::arg("lam"));
    m.def("norm_cdf", &specfun::norm_cdf, py::arg("z"));
    m.def("norm_quantile", &specfun::norm_quantile, py::arg("p"));

    py::class_<PriorSpec>(m, "PriorSpec")
        .def_static("gamma", &PriorSpec::gamma, py::arg("shape"), py::arg("scale"))
        .def_static("exponential", &PriorSpec::exponential, py::arg("rate"))
        .def_static("degenerate", &PriorSpec::degenerate, py::arg("lambda0"))
        .def_static("point_mass_mixture", &PriorSpec::point_mass_mixture,
                    py::arg("pi0"), py::arg("base"))
        .def_static("tabulated", &PriorSpec::tabulated, py::arg("grid"),
                    py::arg("density"))
        .def("mass_at_zero", &PriorSpec::mass_at_zero)
        .def("mean", &PriorSpec::mean)
        .def("variance", &PriorSpec::variance);

    py::class_<GradientValue>(m, "GradientValue")
        .def_readonly("value", &GradientValue::value)
        .def_readonly("extrapolated", &GradientValue::extrapolated);

    py::class_<GradientModel, std::shared_ptr<GradientModel>>(m, "GradientModel")
        .def("lower", &GradientModel::lower)
        .def("upper", &GradientModel::upper)
        .def("method", &GradientModel::method)
        .def("derivative", &GradientModel::derivative, py::arg("x"), py::arg("order"))
        .def("density", &GradientModel::density, py::arg("x"));

    py::class_<HierDraw>(m, "HierDraw")
        .def_readonly("lam", &HierDraw::lambda)
        .def_readonly("j", &HierDraw::j)
        .def_readonly("x", &HierDraw::x);

    py::class_<MarginalModel, std::shared_ptr<MarginalModel>>(m, "MarginalModel")
        .def(py::init<PriorSpec, double>(), py::arg("prior"), py::arg("k"))
        .def("df", &MarginalModel::df)
        .def("marginal_density", &MarginalModel::marginal_density, py::arg("x"),
             py::arg("df_shift") = 0)
        .def("marginal_cdf", &MarginalModel::marginal_cdf, py::arg("x"))
        .def("marginal_quantile", &MarginalModel::marginal_quantile, py::arg("p"))
        .def("exact_log_gradients", &MarginalModel::exact_log_gradients)
        .def("sample", &MarginalModel::sample, py::arg("n"), py::arg("seed"))
        .def("oracle_posterior", [](const MarginalModel& self, double x) {
            const auto p = self.oracle_posterior(x);
            return py::make_tuple(p.mean, p.second_moment, p.variance);
        }, py::arg("x"));

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("basis_size", &FitConfig::basis_size)
        .def_readwrite("penalty", &FitConfig::penalty)
        .def_readwrite("cv_folds", &FitConfig::cv_folds)
        .def_readwrite("q_lo", &FitConfig::q_lo)
        .def_readwrite("q_hi", &FitConfig::q_hi)
        .def_readwrite("seed", &FitConfig::seed)
        .def_readwrite("log_knots", &FitConfig::log_knots);

    m.def("fit_score_matching", &fit_score_matching, py::arg("data"),
          py::arg("config") = FitConfig());
    m.def("fit_lindsey", &fit_lindsey, py::arg("data"), py::arg("config") = FitConfig());

    py::class_<TweedieFlags>(m, "TweedieFlags")
        .def_readonly("clamped_mean", &TweedieFlags::clamped_mean)
        .def_readonly("clamped_variance", &TweedieFlags::clamped_variance)
        .def_readonly("clamped_ratio", &TweedieFlags::clamped_ratio)
        .def_readonly("extrapolated_gradient", &TweedieFlags::extrapolated_gradient)
        .def("any", &TweedieFlags::any)
        .def("__str__", &TweedieFlags::to_string);

    py::class_<PosteriorSummary>(m, "PosteriorSummary")
        .def_readonly("x", &PosteriorSummary::x)
        .def_readonly("k", &PosteriorSummary::k)
        .def_readonly("mean", &PosteriorSummary::mean)
        .def_readonly("variance", &PosteriorSummary::variance)
        .def_readonly("interval_lo", &PosteriorSummary::interval_lo)
        .def_readonly("interval_hi", &PosteriorSummary::interval_hi)
        .def_readonly("fdr", &PosteriorSummary::fdr)
        .def_readonly("flags", &PosteriorSummary::flags);

    m.def("posterior_mean",
          [](const GradientModel& g, double x, double k) {
              return posterior_mean(g, x, k);
          },
          py::arg("gradients"), py::arg("x"), py::arg("k"));
    m.def("posterior_variance",
          [](const GradientModel& g, double x, double k) {
              return posterior_variance(g, x, k);
          },
          py::arg("gradients"), py::arg("x"), py::arg("k"));
    m.def("local_fdr", &local_fdr, py::arg("x"), py::arg("k"), py::arg("pi0"),
          py::arg("g_k_at_x"));
    m.def("summarize", &summarize, py::arg("gradients"), py::arg("x"), py::arg("k"),
          py::arg("level"), py::arg("pi0") = std::nullopt);
    m.def("estimate_pi0", &estimate_pi0, py::arg("p_values"));

    m.def("bh_select",
          [](const std::vector<double>& p, double alpha) {
              const BhResult r = bh_select(p, alpha);
              return py::make_tuple(r.rejected, r.count);
          },
          py::arg("p_values"), py::arg("alpha"));
    m.def("posterior_significance", &posterior_significance, py::arg("mean"),
          py::arg("k"), py::arg("alpha"));
    m.def("dominates", &dominates, py::arg("mean_a"), py::arg("mean_b"),
          py::arg("var_b"), py::arg("alpha"));

    m.def("by_interval",
          [](double x, double k, double q, std::size_t selected, std::size_t total) {
              const Interval iv = by_interval(x, k, q, selected, total);
              return py::make_tuple(iv.lo, iv.hi);
          },
          py::arg("x"), py::arg("k"), py::arg("q"), py::arg("selected"),
          py::arg("total"));

    py::class_<Fig4Report>(m, "Fig4Report")
        .def_readonly("reps", &Fig4Report::reps)
        .def_readonly("proposed_coverage", &Fig4Report::proposed_coverage)
        .def_readonly("nt_coverage", &Fig4Report::nt_coverage);
    m.def("run_fig4", &run_fig4, py::arg("reps"), py::arg("seed"));
}
