// cate-judge: estimate and compare HTE estimator accuracy on held-out data.
//
// Subcommands:
//   generate  write a synthetic dataset, its generative spec, and oracle tau
//   compare   EIF relative-error comparison of two prediction files
//   simulate  Monte Carlo coverage / width / selection study
//   demo      single-dataset demonstration runs (fig1 / fig2 layouts)
//   report    regenerate tables and figures from a results.json
//
// Exit codes: 0 success, 2 usage/validation error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "catejudge/benchmark.hpp"
#include "catejudge/csv_io.hpp"
#include "catejudge/estimators.hpp"
#include "catejudge/folds.hpp"
#include "catejudge/harness.hpp"
#include "catejudge/learners.hpp"
#include "catejudge/report.hpp"
#include "catejudge/rng.hpp"
#include "catejudge/types.hpp"

namespace {

using namespace catejudge;
namespace fs = std::filesystem;

void check_flag(bool ok, const std::string& message) {
    if (!ok) throw config_error(message);
}

LinkFunction parse_link(const std::string& s) {
    LinkFunction link;
    if (s == "identity")
        link.tag = LinkFunction::Tag::Identity;
    else if (s == "log")
        link.tag = LinkFunction::Tag::Log;
    else if (s == "logit")
        link.tag = LinkFunction::Tag::Logit;
    else
        throw config_error("--link must be identity, log, or logit; got '" + s + "'");
    return link;
}

struct GenerateArgs {
    std::string scenario = "a";
    std::size_t d = 20;
    std::size_t n = 500;
    double active_fraction = 0.2;
    double noise_sd = 1.0;
    std::uint64_t seed = 1;
    std::string out_dir = "generate_out";
};

int cmd_generate(const GenerateArgs& a) {
    ScenarioConfig cfg;
    cfg.scenario = scenario_from_string(a.scenario);
    cfg.d = a.d;
    cfg.active_fraction = a.active_fraction;
    cfg.noise_sd = a.noise_sd;
    cfg.n_train = std::max<std::size_t>(2, a.n);
    cfg.n_test = cfg.n_train;
    cfg.seed = a.seed;
    check_flag(a.n >= 2, "--n must be >= 2");
    cfg.validate();

    DgpSpec dgp = gen_scenario(cfg);
    SampledData sample = sample_dataset(dgp, a.n, a.noise_sd, rng::derive_key(a.seed, "sample"));
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    write_dataset_csv((dir / "dataset.csv").string(), sample.data);
    write_dgp_json((dir / "dgp.json").string(), dgp);
    write_column_csv((dir / "tau.csv").string(), sample.oracle_tau, "tau");
    std::cout << "wrote dataset.csv, dgp.json, tau.csv to " << a.out_dir << " (n=" << a.n
              << ", d=" << a.d << ")\n";
    return 0;
}

struct CompareArgs {
    std::string data_path;
    std::string pred_a, pred_b;
    std::string nuisance = "lasso";
    int folds = 2;
    double alpha = 0.10;
    std::uint64_t seed = 1;
    std::string link = "identity";
    std::string out_dir = "compare_out";
};

int cmd_compare(const CompareArgs& a) {
    check_flag(a.alpha > 0.0 && a.alpha < 1.0, "--alpha must lie in (0, 1); got " +
                                                   std::to_string(a.alpha));
    check_flag(a.folds >= 2, "--folds must be >= 2");
    const LinkFunction link = parse_link(a.link);

    TestDataset data = read_dataset_csv(a.data_path);
    const std::size_t n = data.n();
    auto load_pred = [&](const std::string& path, const char* flag) {
        std::vector<double> v = read_column_csv(path);
        check_flag(v.size() == n, std::string(flag) + " has " + std::to_string(v.size()) +
                                      " values but the dataset has " + std::to_string(n) +
                                      " rows");
        return v;
    };
    HtePredictions tau1{load_pred(a.pred_a, "--pred-a"), "pred_a"};
    HtePredictions tau2{load_pred(a.pred_b, "--pred-b"), "pred_b"};

    NuisanceFit nf;
    if (a.nuisance.rfind("true:", 0) == 0) {
        DgpSpec dgp = read_dgp_json(a.nuisance.substr(5));
        check_flag(dgp.d == data.d(), "dgp file dimension d=" + std::to_string(dgp.d) +
                                          " does not match dataset d=" +
                                          std::to_string(data.d()));
        nf = predict_true_nuisance(dgp, data);
    } else {
        LearnerSpec outcome, propensity;
        if (a.nuisance == "lasso") {
            outcome.family = LearnerSpec::Family::Lasso;
            propensity.family = LearnerSpec::Family::Ols;  // logistic on propensity duty
        } else if (a.nuisance == "boosting") {
            outcome.family = LearnerSpec::Family::Boosting;
            propensity.family = LearnerSpec::Family::Boosting;
        } else if (a.nuisance == "logistic-ols") {
            outcome.family = LearnerSpec::Family::Ols;
            propensity.family = LearnerSpec::Family::Ols;
        } else {
            throw config_error("--nuisance must be lasso, boosting, logistic-ols, or "
                               "true:<dgp-file>; got '" +
                               a.nuisance + "'");
        }
        FoldAssignment folds = make_folds(n, a.folds, rng::derive_key(a.seed, "folds"));
        nf = cross_fit(data, folds, outcome, propensity);
    }

    std::vector<std::string> warnings;
    if (tau1.values == tau2.values) {
        warnings.push_back("pred-a and pred-b are identical: E[(tau1 - tau2)^2] = 0, the "
                           "relative-error CI degenerates to a point");
        std::cerr << "warning: " << warnings.back() << "\n";
    }

    std::size_t clamped = 0;
    const bool identity = link.tag == LinkFunction::Tag::Identity;
    EstimateWithInfluence est =
        identity ? eif_relative_error(tau1, tau2, data, nf, a.alpha)
                 : dina_relative_error(tau1, tau2, data, nf, link, a.alpha, &clamped);
    if (!std::isfinite(est.estimate.point) || !std::isfinite(est.estimate.se))
        throw std::runtime_error("estimate overflowed to a non-finite value; check the "
                                 "scale of the outcome and prediction files");
    ComparisonVerdict verdict = compare_relative(est.estimate);

    Json doc{{"schema_version", kSchemaVersion},
             {"kind", "compare"},
             {"method", std::string(identity ? "eif_relative" : "dina_relative")},
             {"link", a.link},
             {"nuisance", a.nuisance},
             {"folds", a.folds},
             {"seed", a.seed},
             {"labels", Json{{"a", a.pred_a}, {"b", a.pred_b}}},
             {"n", n},
             {"alpha", a.alpha},
             {"clamped_units", clamped},
             {"estimate", estimate_to_json(est.estimate)},
             {"verdict", verdict_to_json(verdict)},
             {"warnings", warnings}};
    write_report_bundle(a.out_dir, doc);
    std::cout << "verdict: " << to_string(verdict.decision) << " (point "
              << est.estimate.point << ", " << 100.0 * (1.0 - a.alpha) << "% CI ["
              << est.estimate.ci_lo << ", " << est.estimate.ci_hi << "]) -> " << a.out_dir
              << "/results.json\n";
    return 0;
}

struct SimulateArgs {
    std::string config_path;
    std::string scenario = "a";
    std::size_t d = 20;
    std::size_t n_train = 700;
    std::size_t n_test = 500;
    double noise_sd = 1.0;
    int dgp_draws = 20;
    int reps = 50;
    std::string nuisance_option = "true";
    double alpha = 0.10;
    std::uint64_t seed = 1;
    std::string out_dir = "simulate_out";
};

int cmd_simulate(const SimulateArgs& a, bool config_given) {
    StudyConfig config;
    std::string out_dir = a.out_dir;
    if (config_given) {
        ParsedRunConfig parsed = read_run_config(a.config_path);
        config = parsed.study;
        if (!parsed.out_dir.empty()) out_dir = parsed.out_dir;
    } else {
        check_flag(a.alpha > 0.0 && a.alpha < 1.0, "--alpha must lie in (0, 1); got " +
                                                       std::to_string(a.alpha));
        config.scenario.scenario = scenario_from_string(a.scenario);
        config.scenario.d = a.d;
        config.scenario.n_train = a.n_train;
        config.scenario.n_test = a.n_test;
        config.scenario.noise_sd = a.noise_sd;
        config.n_dgp_draws = a.dgp_draws;
        config.n_reps = a.reps;
        config.nuisance = nuisance_option_from_string(a.nuisance_option);
        config.alpha = a.alpha;
        config.base_seed = a.seed;
    }
    config.validate();

    MetricsTable table = run_study(config);
    Json doc = metrics_to_json(table, config);
    write_report_bundle(out_dir, doc);
    std::cout << "completed " << table.completed << "/" << table.attempted
              << " replications (" << table.failed << " failed) -> " << out_dir
              << "/results.json\n";
    return 0;
}

struct DemoArgs {
    std::string which = "fig1";
    std::uint64_t seed = 1;
    std::string out_dir = "demo_out";
};

int cmd_demo(const DemoArgs& a) {
    Json doc;
    if (a.which == "fig1") {
        doc = fig1_to_json(run_fig1_demo(a.seed), a.seed);
    } else if (a.which == "fig2") {
        doc = fig2_to_json(run_fig2_demo(a.seed), a.seed);
    } else {
        throw config_error("--which must be fig1 or fig2; got '" + a.which + "'");
    }
    write_report_bundle(a.out_dir, doc);
    std::cout << "wrote " << a.which << " demo -> " << a.out_dir << "/results.json\n";
    return 0;
}

struct ReportArgs {
    std::string in_path;
    std::string out_dir = "report_out";
};

int cmd_report(const ReportArgs& a) {
    Json doc = load_results_json(a.in_path);
    std::vector<std::string> files = write_report_bundle(a.out_dir, doc);
    std::cout << "wrote " << files.size() << " files to " << a.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Held-out evaluation of heterogeneous-treatment-effect estimators"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* g = app.add_subcommand("generate", "Write a synthetic dataset + dgp spec");
    g->add_option("--scenario", gen.scenario, "Scenario a|b|c|d");
    g->add_option("--d", gen.d, "Covariate count (>= 5)");
    g->add_option("--n", gen.n, "Rows to sample");
    g->add_option("--active-fraction", gen.active_fraction, "Active feature fraction (0, 0.2]");
    g->add_option("--noise-sd", gen.noise_sd, "Outcome noise sd");
    g->add_option("--seed", gen.seed, "RNG seed");
    g->add_option("--out-dir", gen.out_dir, "Output directory");

    CompareArgs cmp;
    CLI::App* c = app.add_subcommand("compare", "Compare two HTE prediction files");
    c->add_option("--data", cmp.data_path, "Dataset CSV (x1..xd,w,y)")->required();
    c->add_option("--pred-a", cmp.pred_a, "First prediction CSV")->required();
    c->add_option("--pred-b", cmp.pred_b, "Second prediction CSV")->required();
    c->add_option("--nuisance", cmp.nuisance, "lasso|boosting|logistic-ols|true:<dgp-file>");
    c->add_option("--folds", cmp.folds, "Cross-fitting folds (>= 2)");
    c->add_option("--alpha", cmp.alpha, "CI level is 1 - alpha");
    c->add_option("--seed", cmp.seed, "RNG seed");
    c->add_option("--link", cmp.link, "identity|log|logit");
    c->add_option("--out", cmp.out_dir, "Output directory");

    SimulateArgs sim;
    CLI::App* s = app.add_subcommand("simulate", "Run the Monte Carlo study");
    CLI::Option* config_opt = s->add_option("--config", sim.config_path, "Run-config JSON file");
    s->add_option("--scenario", sim.scenario, "Scenario a|b|c|d");
    s->add_option("--d", sim.d, "Covariate count");
    s->add_option("--n-train", sim.n_train, "Training rows per draw");
    s->add_option("--n-test", sim.n_test, "Test rows per replication");
    s->add_option("--noise-sd", sim.noise_sd, "Outcome noise sd");
    s->add_option("--dgp-draws", sim.dgp_draws, "Generative draws");
    s->add_option("--reps", sim.reps, "Replications per draw");
    s->add_option("--nuisance-option", sim.nuisance_option, "true|linear|underfit");
    s->add_option("--alpha", sim.alpha, "CI level is 1 - alpha");
    s->add_option("--seed", sim.seed, "Base seed");
    s->add_option("--out-dir", sim.out_dir, "Output directory");

    DemoArgs demo;
    CLI::App* dm = app.add_subcommand("demo", "Single-dataset demo runs");
    dm->add_option("--which", demo.which, "fig1|fig2");
    dm->add_option("--seed", demo.seed, "RNG seed");
    dm->add_option("--out-dir", demo.out_dir, "Output directory");

    ReportArgs rep;
    CLI::App* r = app.add_subcommand("report", "Regenerate tables/figures from results.json");
    r->add_option("--in", rep.in_path, "results.json produced by this tool")->required();
    r->add_option("--out-dir", rep.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (g->parsed()) return cmd_generate(gen);
        if (c->parsed()) return cmd_compare(cmp);
        if (s->parsed()) return cmd_simulate(sim, config_opt->count() > 0);
        if (dm->parsed()) return cmd_demo(demo);
        if (r->parsed()) return cmd_report(rep);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const config_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return 3;
    }
}
