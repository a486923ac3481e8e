#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chieb/baselines.hpp"
#include "chieb/errors.hpp"
#include "chieb/experiments.hpp"
#include "chieb/gradest.hpp"
#include "chieb/io.hpp"
#include "chieb/marginal.hpp"
#include "chieb/mtest.hpp"
#include "chieb/prior.hpp"
#include "chieb/specfun.hpp"
#include "chieb/tweedie.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

std::string resolve_output(const std::string& path) {
    const char* dir = std::getenv("CHIEB_OUT_DIR");
    if (dir && *dir && std::filesystem::path(path).is_relative()) {
        return (std::filesystem::path(dir) / path).string();
    }
    return path;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw chieb::data_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void emit_json(const std::string& path, const json& j) {
    chieb::write_text(resolve_output(path), j.dump(2) + "\n");
}

std::shared_ptr<chieb::GradientModel> build_gradients(
    const std::string& method, const std::vector<double>& xs, double k,
    const std::string& prior_path, std::uint64_t seed,
    std::shared_ptr<chieb::MarginalModel>* model_out = nullptr) {
    if (method == "exact") {
        if (prior_path.empty()) {
            throw chieb::config_error("exact method requires --prior");
        }
        auto model = std::make_shared<chieb::MarginalModel>(
            chieb::PriorSpec::from_json(load_json(prior_path)), k);
        if (model_out) *model_out = model;
        return model->exact_log_gradients();
    }
    chieb::FitConfig cfg;
    cfg.seed = seed;
    if (method == "score-matching") return chieb::fit_score_matching(xs, cfg);
    if (method == "lindsey") return chieb::fit_lindsey(xs, cfg);
    throw chieb::config_error("unknown method '" + method + "'");
}

struct CommonOpts {
    std::string input, output, prior_path;
    std::string method = "score-matching";
    double k = -1.0;
    double alpha = 0.1;
    double level = 0.9;
    double pi0 = -1.0;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_estimate(const CommonOpts& o) {
    std::optional<double> default_k;
    if (o.k > 0.0) default_k = o.k;
    const chieb::Battery b = chieb::ingest_csv(o.input, default_k);
    if (b.records.empty()) throw chieb::data_error("empty battery");

    std::vector<double> xs;
    xs.reserve(b.size());
    for (const auto& r : b.records) xs.push_back(r.x);

    std::shared_ptr<chieb::MarginalModel> model;
    const auto grad = build_gradients(o.method, xs, b.records.front().k,
                                      o.prior_path, o.seed, &model);

    std::optional<double> pi0;
    if (o.pi0 >= 0.0) {
        pi0 = o.pi0;
    } else if (o.pi0 == -2.0) {  // --pi0-estimate sets this sentinel
        pi0 = chieb::estimate_pi0(chieb::p_values(b));
    }

    std::vector<chieb::EstimateRow> rows;
    rows.reserve(b.size());
    bool any_flag = false;
    for (const auto& r : b.records) {
        chieb::EstimateRow row;
        row.id = r.id;
        row.summary = chieb::summarize(*grad, r.x, r.k, o.level, pi0);
        row.significant = chieb::posterior_significance(row.summary.mean, r.k, o.alpha);
        any_flag = any_flag || row.summary.flags.any();
        rows.push_back(std::move(row));
    }
    chieb::write_estimates_csv(resolve_output(o.output), rows);

    json meta;
    meta["version"] = kVersion;
    meta["subcommand"] = "estimate";
    meta["input"] = o.input;
    meta["method"] = o.method;
    meta["alpha"] = o.alpha;
    meta["level"] = o.level;
    meta["seed"] = o.seed;
    if (pi0) meta["pi0"] = *pi0;
    meta["cases"] = b.size();
    meta["flags_raised"] = any_flag;
    emit_json(o.output + ".meta.json", meta);
    return 0;
}

int cmd_bh(const CommonOpts& o) {
    std::optional<double> default_k;
    if (o.k > 0.0) default_k = o.k;
    const chieb::Battery b = chieb::ingest_csv(o.input, default_k);
    const chieb::BhResult res = chieb::bh_select(b, o.alpha);

    json rep;
    rep["version"] = kVersion;
    rep["alpha"] = o.alpha;
    rep["cases"] = b.size();
    rep["selected"] = res.count;
    rep["cutoff_x"] = res.cutoff_x;
    rep["rejected_ids"] = res.rejected_ids;
    bool have_truth = !b.records.empty();
    for (const auto& r : b.records) have_truth = have_truth && r.is_null.has_value();
    if (have_truth) {
        const chieb::EmpiricalFdr ef = chieb::empirical_fdr(res, b);
        rep["empirical_fdr"] = ef.fdr;
        rep["true_positives"] = ef.true_positives;
    }
    emit_json(o.output, rep);
    return 0;
}

int cmd_fit_gradients(const CommonOpts& o) {
    std::optional<double> default_k;
    if (o.k > 0.0) default_k = o.k;
    const chieb::Battery b = chieb::ingest_csv(o.input, default_k);
    std::vector<double> xs;
    xs.reserve(b.size());
    for (const auto& r : b.records) xs.push_back(r.x);
    const auto grad = build_gradients(o.method, xs, b.records.empty() ? o.k : b.records.front().k,
                                      o.prior_path, o.seed);
    emit_json(o.output, grad->to_json());
    return 0;
}

int cmd_curves(const CommonOpts& o, double x_min, double x_max, int points) {
    if (o.prior_path.empty()) throw chieb::config_error("curves requires --prior");
    if (o.k <= 0.0) throw chieb::config_error("curves requires --k");
    if (!(x_min > 0.0 && x_max > x_min) || points < 2) {
        throw chieb::config_error("curves requires 0 < x-min < x-max and points >= 2");
    }
    const chieb::MarginalModel model(chieb::PriorSpec::from_json(load_json(o.prior_path)), o.k);
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = x_min + (x_max - x_min) * i / (points - 1.0);
    }
    const auto rows = chieb::curve_emit(model, grid);
    std::ostringstream out;
    out << "x,one_plus_2l,two_layer,u,v,w\n";
    for (const auto& r : rows) {
        out << chieb::format_double(r.x) << ',' << chieb::format_double(r.one_plus_2l)
            << ',' << chieb::format_double(r.two_layer) << ',' << chieb::format_double(r.u)
            << ',' << chieb::format_double(r.v) << ',' << chieb::format_double(r.w) << '\n';
    }
    chieb::write_text(resolve_output(o.output), out.str());
    return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& which, std::size_t reps,
                 int xor_n, int xor_p) {
    json rep;
    rep["version"] = kVersion;
    rep["scenario"] = which;
    rep["seed"] = o.seed;
    if (which == "fig4") {
        const chieb::Fig4Report r = chieb::run_fig4(reps, o.seed);
        rep["reps"] = r.reps;
        rep["proposed_coverage"] = r.proposed_coverage;
        rep["nt_coverage"] = r.nt_coverage;
    } else if (which == "fig5") {
        const chieb::Fig5Report r = chieb::run_fig5(reps, o.seed);
        rep["cases"] = r.cases;
        rep["selected"] = r.selected;
        rep["selected_nonnull"] = r.selected_nonnull;
        rep["cutoff_x"] = r.cutoff_x;
        rep["empirical_fdr"] = r.empirical_fdr;
        rep["coverage_proposed_exact"] = r.coverage_proposed_exact;
        rep["coverage_proposed_fitted"] = r.coverage_proposed_fitted;
        rep["coverage_nt"] = r.coverage_nt;
        rep["coverage_by"] = r.coverage_by;
        rep["fcr_by"] = r.fcr_by;
    } else if (which == "xor") {
        chieb::XorConfig cfg;
        cfg.n = xor_n;
        cfg.p = xor_p;
        cfg.seed = o.seed;
        const chieb::XorData data = chieb::gen_xor(cfg);
        const chieb::TripletScanResult r =
            chieb::triplet_scan(data, o.alpha, chieb::xor_fit_config(o.seed), o.threads);
        rep["n"] = cfg.n;
        rep["p"] = cfg.p;
        rep["alpha"] = o.alpha;
        rep["triplets"] = r.results.size();
        rep["selected"] = r.selected_count;
        rep["cutoff_q"] = r.cutoff_q;
        json sel = json::array();
        for (const auto& t : r.results) {
            if (!t.selected) break;  // results are q-sorted; selected form a prefix
            json e;
            e["idx"] = t.idx;
            e["q"] = t.q;
            e["df"] = t.df;
            e["p_value"] = t.p_value;
            e["mean"] = t.summary.mean;
            e["var"] = t.summary.variance;
            e["lo"] = t.summary.interval_lo;
            e["hi"] = t.summary.interval_hi;
            sel.push_back(std::move(e));
        }
        rep["selected_triplets"] = std::move(sel);
    } else {
        throw chieb::config_error("unknown scenario '" + which + "'");
    }
    emit_json(o.output, rep);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical-Bayes effect-size estimation for chi-squared batteries"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOpts o;
    bool pi0_estimate = false;
    double x_min = 0.5, x_max = 60.0;
    int points = 200;
    std::size_t reps = 1000;
    int xor_n = 300, xor_p = 100;
    std::string scenario;

    auto add_common = [&](CLI::App* c, bool needs_input, bool needs_output) {
        auto* in = c->add_option("-i,--input", o.input, "input battery CSV");
        if (needs_input) in->required();
        auto* out = c->add_option("-o,--output", o.output, "output path");
        if (needs_output) out->required();
        c->add_option("-k,--k", o.k, "default degrees of freedom");
        c->add_option("--alpha", o.alpha, "FDR / significance level");
        c->add_option("--level", o.level, "interval level");
        c->add_option("--method", o.method, "score-matching|lindsey|exact");
        c->add_option("--prior", o.prior_path, "prior spec JSON (exact method)");
        c->add_option("--seed", o.seed, "RNG seed");
        c->add_option("--threads", o.threads, "worker threads (0 = hardware)");
    };

    auto* est = app.add_subcommand("estimate", "per-case posterior summaries");
    add_common(est, true, true);
    est->add_option("--pi0", o.pi0, "null proportion for local fdr");
    est->add_flag("--pi0-estimate", pi0_estimate, "plug-in pi0 from p-values");

    auto* bh = app.add_subcommand("bh", "BH selection report");
    add_common(bh, true, true);

    auto* fitg = app.add_subcommand("fit-gradients", "serialize a fitted gradient model");
    add_common(fitg, true, true);

    auto* curves = app.add_subcommand("curves", "shrinkage curve tables");
    add_common(curves, false, true);
    curves->add_option("--x-min", x_min, "grid start");
    curves->add_option("--x-max", x_max, "grid end");
    curves->add_option("--points", points, "grid size");

    auto* sim = app.add_subcommand("simulate", "named simulation studies");
    add_common(sim, false, true);
    sim->add_option("scenario", scenario, "fig4|fig5|xor")->required();
    sim->add_option("--reps", reps, "replications / cases");
    sim->add_option("--n", xor_n, "xor sample size");
    sim->add_option("--p", xor_p, "xor variable count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pi0_estimate) o.pi0 = -2.0;
        if (est->parsed()) return cmd_estimate(o);
        if (bh->parsed()) return cmd_bh(o);
        if (fitg->parsed()) return cmd_fit_gradients(o);
        if (curves->parsed()) return cmd_curves(o, x_min, x_max, points);
        if (sim->parsed()) return cmd_simulate(o, scenario, reps, xor_n, xor_p);
    } catch (const chieb::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const chieb::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const chieb::insufficient_data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const chieb::pole_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const chieb::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
