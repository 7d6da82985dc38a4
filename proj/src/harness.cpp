#include "catejudge/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "catejudge/folds.hpp"
#include "catejudge/linear.hpp"
#include "catejudge/rng.hpp"
#include "catejudge/stats.hpp"

namespace catejudge {

std::string to_string(NuisanceOption o) {
    switch (o) {
        case NuisanceOption::TrueNuisance: return "true";
        case NuisanceOption::WellSpecifiedLinear: return "linear";
        case NuisanceOption::UnderfitBoosting: return "underfit";
    }
    return "?";
}

NuisanceOption nuisance_option_from_string(const std::string& s) {
    if (s == "true" || s == "true_nuisance") return NuisanceOption::TrueNuisance;
    if (s == "linear" || s == "well_specified_linear") return NuisanceOption::WellSpecifiedLinear;
    if (s == "underfit" || s == "underfit_boosting") return NuisanceOption::UnderfitBoosting;
    throw config_error("unknown nuisance option '" + s +
                       "' (expected true, linear, or underfit)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::PlugInAbs: return "plugin_abs";
        case Method::EifAbs: return "eif_abs";
        case Method::EifRel: return "eif_rel";
        case Method::DinaAbs: return "dina_abs";
        case Method::DinaRel: return "dina_rel";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "plugin_abs") return Method::PlugInAbs;
    if (s == "eif_abs") return Method::EifAbs;
    if (s == "eif_rel") return Method::EifRel;
    if (s == "dina_abs") return Method::DinaAbs;
    if (s == "dina_rel") return Method::DinaRel;
    throw config_error("unknown method '" + s + "'");
}

bool method_is_relative(Method m) { return m == Method::EifRel || m == Method::DinaRel; }

void StudyConfig::validate() const {
    scenario.validate();
    if (n_dgp_draws < 1) throw config_error("n_dgp_draws must be >= 1");
    if (n_reps < 1) throw config_error("n_reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
    if (folds < 2) throw config_error("folds must be >= 2");
    if (methods.empty()) throw config_error("methods must be non-empty");
    if (n_oracle < 10000) throw config_error("n_oracle must be >= 10000");
}

int resolve_worker_count(int requested, std::size_t n_tasks) {
    int w = requested;
    if (w <= 0) {
        if (const char* env = std::getenv("CATE_JUDGE_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end && *end == '\0' && v > 0) w = static_cast<int>(v);
        }
    }
    if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
    if (w <= 0) w = 1;
    if (static_cast<std::size_t>(w) > n_tasks) w = static_cast<int>(std::max<std::size_t>(1, n_tasks));
    return w;
}

namespace {

struct RowTally {
    std::size_t completed = 0, covered = 0;
    long double width_sum = 0.0L, err_sum = 0.0L;
};

struct SelTally {
    std::size_t correct = 0, wrong = 0, inconclusive = 0;  // over non-tie reps
};

struct DrawTally {
    std::vector<RowTally> rows;
    std::vector<SelTally> sel;  // per method, config order
    std::size_t failed = 0;
    std::vector<std::string> diagnostics;
};

struct RowKey {
    Method method;
    std::string target;
    int oracle_target;  // 0 = phi1, 1 = phi2, 2 = delta
};

std::vector<RowKey> layout_rows(const std::vector<Method>& methods) {
    std::vector<RowKey> keys;
    for (Method m : methods) {
        if (method_is_relative(m)) {
            keys.push_back({m, "rel", 2});
        } else {
            keys.push_back({m, "abs_lasso", 0});
            keys.push_back({m, "abs_boost", 1});
        }
    }
    return keys;
}

LearnerSpec lasso_spec() {
    LearnerSpec s;
    s.family = LearnerSpec::Family::Lasso;
    return s;
}

LearnerSpec boost_spec(int depth, int rounds) {
    LearnerSpec s;
    s.family = LearnerSpec::Family::Boosting;
    s.boost.max_depth = depth;
    s.boost.rounds = rounds;
    return s;
}

LearnerSpec ols_spec() {
    LearnerSpec s;
    s.family = LearnerSpec::Family::Ols;
    return s;
}

NuisanceFit build_nuisance(NuisanceOption option, const DgpSpec& dgp, const TestDataset& data,
                           int k, std::uint64_t fold_seed) {
    switch (option) {
        case NuisanceOption::TrueNuisance:
            return predict_true_nuisance(dgp, data);
        case NuisanceOption::WellSpecifiedLinear:
            return cross_fit(data, make_folds(data.n(), k, fold_seed), ols_spec(), ols_spec());
        case NuisanceOption::UnderfitBoosting:
            // Deliberately crippled outcome models; the propensity stays a
            // logistic fit so the relative estimator's pseudo-outcomes keep
            // their mean (the contrast the coverage study is after).
            return cross_fit(data, make_folds(data.n(), k, fold_seed), boost_spec(1, 3),
                             ols_spec());
    }
    throw config_error("unknown nuisance option");
}

void tally_absolute(DrawTally& t, std::size_t row1, std::size_t row2,
                    const EstimateWithInfluence& e1, const EstimateWithInfluence& e2,
                    const OracleTruth& oracle) {
    const ErrorEstimate* est[2] = {&e1.estimate, &e2.estimate};
    const double truth[2] = {oracle.phi1, oracle.phi2};
    const std::size_t rows[2] = {row1, row2};
    for (int a = 0; a < 2; ++a) {
        RowTally& r = t.rows[rows[a]];
        ++r.completed;
        if (est[a]->ci_lo <= truth[a] && truth[a] <= est[a]->ci_hi) ++r.covered;
        r.width_sum += est[a]->width();
        r.err_sum += std::abs(est[a]->point - truth[a]);
    }
}

void tally_selection(SelTally& s, const ComparisonVerdict& v, const OracleTruth& oracle) {
    if (std::abs(oracle.delta) <= 3.0 * oracle.mc_se) return;  // tie: no correct answer
    const Decision correct = oracle.delta > 0.0 ? Decision::SelectSecond : Decision::SelectFirst;
    if (v.decision == Decision::Inconclusive)
        ++s.inconclusive;
    else if (v.decision == correct)
        ++s.correct;
    else
        ++s.wrong;
}

}  // namespace

MetricsTable run_study(const StudyConfig& config, int n_workers) {
    config.validate();
    const std::vector<RowKey> keys = layout_rows(config.methods);
    const std::size_t n_draws = static_cast<std::size_t>(config.n_dgp_draws);
    const std::size_t n_reps = static_cast<std::size_t>(config.n_reps);
    const LinkFunction identity{};

    auto run_draw = [&](std::size_t draw) -> DrawTally {
        DrawTally t;
        t.rows.resize(keys.size());
        t.sel.resize(config.methods.size());

        ScenarioConfig cfg = config.scenario;
        cfg.seed = rng::derive_key(config.base_seed, "dgp", draw);
        DgpSpec dgp;
        HteFunction t1, t2;
        OracleTruth oracle;
        try {
            dgp = gen_scenario(cfg);
            SampledData train = sample_dataset(dgp, cfg.n_train, cfg.noise_sd,
                                               rng::derive_key(config.base_seed, "train", draw));
            t1 = make_t_learner(train.data, lasso_spec());
            t2 = make_t_learner(train.data, boost_spec(2, 50));
            oracle = true_errors(dgp, t1, t2, config.n_oracle,
                                 rng::derive_key(config.base_seed, "oracle", draw));
        } catch (const std::exception& ex) {
            t.failed += n_reps;
            t.diagnostics.push_back("draw " + std::to_string(draw) + ": " + ex.what());
            return t;
        }

        for (std::size_t rep = 0; rep < n_reps; ++rep) {
            try {
                SampledData test =
                    sample_dataset(dgp, cfg.n_test, cfg.noise_sd,
                                   rng::derive_key(config.base_seed, "rep", draw, rep));
                NuisanceFit nf =
                    build_nuisance(config.nuisance, dgp, test.data, config.folds,
                                   rng::derive_key(config.base_seed, "folds", draw, rep));
                HtePredictions tau1 = materialize(t1, test.data.x, "lasso_t");
                HtePredictions tau2 = materialize(t2, test.data.x, "boost_t");

                std::size_t row = 0;
                for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                    const Method m = config.methods[mi];
                    if (method_is_relative(m)) {
                        EstimateWithInfluence est =
                            m == Method::EifRel
                                ? eif_relative_error(tau1, tau2, test.data, nf, config.alpha)
                                : dina_relative_error(tau1, tau2, test.data, nf, identity,
                                                      config.alpha);
                        RowTally& r = t.rows[row];
                        ++r.completed;
                        if (est.estimate.ci_lo <= oracle.delta &&
                            oracle.delta <= est.estimate.ci_hi)
                            ++r.covered;
                        r.width_sum += est.estimate.width();
                        r.err_sum += std::abs(est.estimate.point - oracle.delta);
                        tally_selection(t.sel[mi], compare_relative(est.estimate), oracle);
                        row += 1;
                    } else {
                        EstimateWithInfluence e1, e2;
                        if (m == Method::PlugInAbs) {
                            e1 = plugin_absolute_error(tau1, test.data, nf, config.alpha);
                            e2 = plugin_absolute_error(tau2, test.data, nf, config.alpha);
                        } else if (m == Method::EifAbs) {
                            e1 = eif_absolute_error(tau1, test.data, nf, config.alpha);
                            e2 = eif_absolute_error(tau2, test.data, nf, config.alpha);
                        } else {
                            e1 = dina_absolute_error(tau1, test.data, nf, identity, config.alpha);
                            e2 = dina_absolute_error(tau2, test.data, nf, identity, config.alpha);
                        }
                        tally_absolute(t, row, row + 1, e1, e2, oracle);
                        tally_selection(t.sel[mi],
                                        compare_absolute(e1.estimate, e2.estimate), oracle);
                        row += 2;
                    }
                }
            } catch (const std::exception& ex) {
                ++t.failed;
                t.diagnostics.push_back("draw " + std::to_string(draw) + " rep " +
                                        std::to_string(rep) + ": " + ex.what());
            }
        }
        return t;
    };

    std::vector<DrawTally> tallies(n_draws);
    const int workers = resolve_worker_count(n_workers, n_draws);
    if (workers <= 1) {
        for (std::size_t d = 0; d < n_draws; ++d) tallies[d] = run_draw(d);
    } else {
        std::atomic<std::size_t> next{0};
        auto loop = [&]() {
            for (;;) {
                const std::size_t d = next.fetch_add(1);
                if (d >= n_draws) return;
                tallies[d] = run_draw(d);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(loop);
        for (std::thread& th : pool) th.join();
    }

    // Fixed-order reduction keeps results identical across worker counts.
    MetricsTable table;
    table.attempted = n_draws * n_reps;
    std::vector<RowTally> rows(keys.size());
    std::vector<SelTally> sel(config.methods.size());
    for (const DrawTally& t : tallies) {
        table.failed += t.failed;
        for (const std::string& d : t.diagnostics) table.diagnostics.push_back(d);
        for (std::size_t r = 0; r < keys.size(); ++r) {
            rows[r].completed += t.rows[r].completed;
            rows[r].covered += t.rows[r].covered;
            rows[r].width_sum += t.rows[r].width_sum;
            rows[r].err_sum += t.rows[r].err_sum;
        }
        for (std::size_t mi = 0; mi < sel.size(); ++mi) {
            sel[mi].correct += t.sel[mi].correct;
            sel[mi].wrong += t.sel[mi].wrong;
            sel[mi].inconclusive += t.sel[mi].inconclusive;
        }
    }
    table.completed = table.attempted - table.failed;

    std::size_t row = 0;
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        const std::size_t n_rows = method_is_relative(config.methods[mi]) ? 1 : 2;
        const SelTally& s = sel[mi];
        const std::size_t n_sel = s.correct + s.wrong + s.inconclusive;
        for (std::size_t a = 0; a < n_rows; ++a, ++row) {
            MetricsRow out;
            out.method = keys[row].method;
            out.target = keys[row].target;
            out.n_completed = rows[row].completed;
            out.n_selection = n_sel;
            if (rows[row].completed > 0) {
                const double n = static_cast<double>(rows[row].completed);
                out.coverage = static_cast<double>(rows[row].covered) / n;
                out.mean_width = static_cast<double>(rows[row].width_sum / n);
                out.mean_abs_error_of_estimate = static_cast<double>(rows[row].err_sum / n);
            }
            if (n_sel > 0) {
                out.selection_accuracy = static_cast<double>(s.correct) / n_sel;
                out.wrong_rate = static_cast<double>(s.wrong) / n_sel;
                out.inconclusive_rate = static_cast<double>(s.inconclusive) / n_sel;
            }  // n_sel == 0 keeps the (0, 0, 1) defaults
            table.rows.push_back(std::move(out));
        }
    }
    return table;
}

namespace {

ScenarioConfig demo_config(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.scenario = Scenario::A;
    cfg.d = 20;
    cfg.n_train = 500;
    cfg.n_test = 500;
    cfg.noise_sd = 1.0;
    cfg.seed = rng::derive_key(seed, "dgp");
    return cfg;
}

ErrorEstimate relative_from_plugin(const EstimateWithInfluence& p1,
                                   const EstimateWithInfluence& p2, double alpha) {
    InfluenceValues diff;
    diff.psi_plus.resize(p1.influence.psi_plus.size());
    for (std::size_t i = 0; i < diff.psi_plus.size(); ++i)
        diff.psi_plus[i] = p1.influence.psi_plus[i] - p2.influence.psi_plus[i];
    return mean_and_ci(diff, alpha);
}

}  // namespace

Fig1Result run_fig1_demo(std::uint64_t seed) {
    const double alpha = 0.10;
    ScenarioConfig cfg = demo_config(seed);
    DgpSpec dgp = gen_scenario(cfg);
    SampledData train =
        sample_dataset(dgp, cfg.n_train, cfg.noise_sd, rng::derive_key(seed, "train"));
    HteFunction t1 = make_t_learner(train.data, lasso_spec());
    HteFunction t2 = make_t_learner(train.data, boost_spec(2, 50));
    OracleTruth oracle = true_errors(dgp, t1, t2, 50000, rng::derive_key(seed, "oracle"));

    SampledData test =
        sample_dataset(dgp, cfg.n_test, cfg.noise_sd, rng::derive_key(seed, "test"));
    NuisanceFit nf = build_nuisance(NuisanceOption::UnderfitBoosting, dgp, test.data, 2,
                                    rng::derive_key(seed, "folds"));
    HtePredictions tau1 = materialize(t1, test.data.x, "lasso_t");
    HtePredictions tau2 = materialize(t2, test.data.x, "boost_t");

    EstimateWithInfluence p1 = plugin_absolute_error(tau1, test.data, nf, alpha);
    EstimateWithInfluence p2 = plugin_absolute_error(tau2, test.data, nf, alpha);
    EstimateWithInfluence a1 = eif_absolute_error(tau1, test.data, nf, alpha);
    EstimateWithInfluence a2 = eif_absolute_error(tau2, test.data, nf, alpha);
    EstimateWithInfluence rel = eif_relative_error(tau1, tau2, test.data, nf, alpha);

    Fig1Result out;
    out.oracle = oracle;
    out.estimates.push_back({"plugin_abs_lasso", p1.estimate});
    out.estimates.push_back({"plugin_abs_boost", p2.estimate});
    out.estimates.push_back({"eif_abs_lasso", a1.estimate});
    out.estimates.push_back({"eif_abs_boost", a2.estimate});
    out.estimates.push_back({"plugin_rel", relative_from_plugin(p1, p2, alpha)});
    out.estimates.push_back({"eif_rel", rel.estimate});
    return out;
}

Fig2Result run_fig2_demo(std::uint64_t seed) {
    const double alpha = 0.10;
    ScenarioConfig cfg = demo_config(seed);
    DgpSpec dgp = gen_scenario(cfg);
    SampledData train =
        sample_dataset(dgp, cfg.n_train, cfg.noise_sd, rng::derive_key(seed, "train"));

    // Anchor the pair at the CV-selected penalty of the pooled arms.
    auto arm_lambda = [&](int arm) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < train.data.n(); ++i)
            if (train.data.w[i] == arm) idx.push_back(i);
        Matrix xa(idx.size(), train.data.d());
        std::vector<double> ya(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            ya[r] = train.data.y[idx[r]];
            for (std::size_t j = 0; j < train.data.d(); ++j) xa(r, j) = train.data.x(idx[r], j);
        }
        return fit_lasso_cv(xa, ya).lambda;
    };
    const double lstar = std::sqrt(arm_lambda(0) * arm_lambda(1));

    // Both penalties sit above the CV optimum: the fits stay close to each
    // other (narrow relative CI) while each carries enough bias that the
    // absolute CIs are wide and typically overlap.
    Fig2Result out;
    out.lambda1 = 2.0 * lstar;
    out.lambda2 = 3.0 * lstar;
    auto [f1, f2] = make_similar_pair(train.data, out.lambda1, out.lambda2);
    out.oracle = true_errors(dgp, f1, f2, 50000, rng::derive_key(seed, "oracle"));

    SampledData test =
        sample_dataset(dgp, cfg.n_test, cfg.noise_sd, rng::derive_key(seed, "test"));
    NuisanceFit nf = predict_true_nuisance(dgp, test.data);
    HtePredictions tau1 = materialize(f1, test.data.x, "lasso_a");
    HtePredictions tau2 = materialize(f2, test.data.x, "lasso_b");

    out.abs1 = eif_absolute_error(tau1, test.data, nf, alpha).estimate;
    out.abs2 = eif_absolute_error(tau2, test.data, nf, alpha).estimate;
    out.rel = eif_relative_error(tau1, tau2, test.data, nf, alpha).estimate;
    out.verdict_abs = compare_absolute(out.abs1, out.abs2);
    out.verdict_rel = compare_relative(out.rel);
    return out;
}

}  // namespace catejudge
