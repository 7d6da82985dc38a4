#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "catejudge/estimators.hpp"
#include "catejudge/harness.hpp"
#include "catejudge/types.hpp"

using namespace catejudge;

namespace {

StudyConfig tiny_study() {
    StudyConfig cfg;
    cfg.scenario.scenario = Scenario::A;
    cfg.scenario.d = 8;
    cfg.scenario.n_train = 150;
    cfg.scenario.n_test = 80;
    cfg.n_dgp_draws = 1;
    cfg.n_reps = 1;
    cfg.nuisance = NuisanceOption::TrueNuisance;
    cfg.n_oracle = 10000;
    cfg.base_seed = 5;
    return cfg;
}

bool rows_equal(const MetricsTable& a, const MetricsTable& b) {
    if (a.rows.size() != b.rows.size() || a.attempted != b.attempted ||
        a.completed != b.completed || a.failed != b.failed)
        return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const MetricsRow &ra = a.rows[i], &rb = b.rows[i];
        if (ra.method != rb.method || ra.target != rb.target ||
            ra.n_completed != rb.n_completed || ra.n_selection != rb.n_selection ||
            ra.coverage != rb.coverage || ra.mean_width != rb.mean_width ||
            ra.mean_abs_error_of_estimate != rb.mean_abs_error_of_estimate ||
            ra.selection_accuracy != rb.selection_accuracy || ra.wrong_rate != rb.wrong_rate ||
            ra.inconclusive_rate != rb.inconclusive_rate)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("method and nuisance names round-trip") {
    for (Method m : {Method::PlugInAbs, Method::EifAbs, Method::EifRel, Method::DinaAbs,
                     Method::DinaRel})
        CHECK(method_from_string(to_string(m)) == m);
    for (NuisanceOption o : {NuisanceOption::TrueNuisance, NuisanceOption::WellSpecifiedLinear,
                             NuisanceOption::UnderfitBoosting})
        CHECK(nuisance_option_from_string(to_string(o)) == o);
    CHECK_THROWS_AS(method_from_string("magic"), config_error);
    CHECK_THROWS_AS(nuisance_option_from_string("none"), config_error);
    CHECK(method_is_relative(Method::EifRel));
    CHECK(method_is_relative(Method::DinaRel));
    CHECK(!method_is_relative(Method::EifAbs));
    CHECK(!method_is_relative(Method::PlugInAbs));
}

TEST_CASE("study config validation") {
    StudyConfig cfg = tiny_study();
    CHECK_NOTHROW(cfg.validate());
    cfg.n_dgp_draws = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_study();
    cfg.n_reps = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_study();
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_study();
    cfg.folds = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_study();
    cfg.methods.clear();
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_study();
    cfg.n_oracle = 5000;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("single-replication study produces degenerate rates") {
    MetricsTable t = run_study(tiny_study(), 1);
    CHECK(t.attempted == 1);
    CHECK(t.completed == 1);
    CHECK(t.failed == 0);
    CHECK(t.diagnostics.empty());
    REQUIRE(t.rows.size() == 8);  // 3 absolute methods x 2 targets + 2 relative
    for (const MetricsRow& r : t.rows) {
        CHECK(r.n_completed == 1);
        CHECK((r.coverage == 0.0 || r.coverage == 1.0));
        CHECK(r.mean_width >= 0.0);
        CHECK(r.mean_abs_error_of_estimate >= 0.0);
        bool degenerate_rates = (r.selection_accuracy == 0.0 || r.selection_accuracy == 1.0) &&
                                (r.wrong_rate == 0.0 || r.wrong_rate == 1.0) &&
                                (r.inconclusive_rate == 0.0 || r.inconclusive_rate == 1.0);
        CHECK(degenerate_rates);
    }
    std::set<std::string> targets;
    for (const MetricsRow& r : t.rows) targets.insert(r.target);
    CHECK(targets == std::set<std::string>{"abs_lasso", "abs_boost", "rel"});
}

TEST_CASE("rates sum to one and counters stay consistent") {
    StudyConfig cfg = tiny_study();
    cfg.n_dgp_draws = 2;
    cfg.n_reps = 3;
    MetricsTable t = run_study(cfg, 1);
    CHECK(t.attempted == 6);
    CHECK(t.completed + t.failed == t.attempted);
    for (const MetricsRow& r : t.rows) {
        CHECK(r.selection_accuracy + r.wrong_rate + r.inconclusive_rate ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.selection_accuracy >= 0.0);
        CHECK(r.selection_accuracy <= 1.0);
        CHECK(r.wrong_rate >= 0.0);
        CHECK(r.wrong_rate <= 1.0);
        CHECK(r.inconclusive_rate >= 0.0);
        CHECK(r.inconclusive_rate <= 1.0);
        CHECK(r.n_completed <= t.completed);
        CHECK(r.n_selection <= r.n_completed);
        CHECK(r.coverage >= 0.0);
        CHECK(r.coverage <= 1.0);
    }
}

TEST_CASE("study results are identical across worker counts") {
    StudyConfig cfg = tiny_study();
    cfg.n_dgp_draws = 3;
    cfg.n_reps = 2;
    cfg.nuisance = NuisanceOption::WellSpecifiedLinear;  // exercises cross-fitting
    MetricsTable t1 = run_study(cfg, 1);
    MetricsTable t4 = run_study(cfg, 4);
    CHECK(rows_equal(t1, t4));
    MetricsTable t2 = run_study(cfg, 2);
    CHECK(rows_equal(t1, t2));
}

TEST_CASE("worker resolution: explicit request, environment cap, task cap") {
    CHECK(resolve_worker_count(3, 100) == 3);
    CHECK(resolve_worker_count(8, 2) == 2);   // never more workers than tasks
    CHECK(resolve_worker_count(1, 0) == 1);   // floor
    setenv("CATE_JUDGE_THREADS", "2", 1);
    CHECK(resolve_worker_count(0, 100) == 2);
    CHECK(resolve_worker_count(5, 100) == 5);  // explicit beats environment
    setenv("CATE_JUDGE_THREADS", "junk", 1);
    CHECK(resolve_worker_count(0, 100) >= 1);  // malformed env ignored
    unsetenv("CATE_JUDGE_THREADS");
}

TEST_CASE("fig1 demo: structure, determinism, and seeded repetition claims") {
    Fig1Result once = run_fig1_demo(5);
    REQUIRE(once.estimates.size() == 6);
    std::set<std::string> names;
    for (const auto& ne : once.estimates) names.insert(ne.name);
    CHECK(names == std::set<std::string>{"plugin_abs_lasso", "plugin_abs_boost",
                                         "eif_abs_lasso", "eif_abs_boost", "plugin_rel",
                                         "eif_rel"});
    CHECK(once.oracle.n_oracle > 0);
    CHECK(once.oracle.phi1 > 0.0);
    CHECK(once.oracle.phi2 > 0.0);
    CHECK(once.oracle.delta == once.oracle.phi1 - once.oracle.phi2);

    Fig1Result again = run_fig1_demo(5);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(once.estimates[i].name == again.estimates[i].name);
        CHECK(once.estimates[i].estimate.point == again.estimates[i].estimate.point);
        CHECK(once.estimates[i].estimate.ci_lo == again.estimates[i].estimate.ci_lo);
    }

    // The plug-in-implied relative estimate agrees with the EIF relative one.
    double plugin_rel = 0.0, eif_rel_pt = 0.0;
    for (const auto& ne : once.estimates) {
        if (ne.name == "plugin_rel") plugin_rel = ne.estimate.point;
        if (ne.name == "eif_rel") eif_rel_pt = ne.estimate.point;
    }
    CHECK(plugin_rel == doctest::Approx(eif_rel_pt).epsilon(1e-10));

    int rel_covers = 0, neg_abs = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        Fig1Result r = run_fig1_demo(static_cast<std::uint64_t>(seed));
        for (const auto& ne : r.estimates) {
            if (ne.name == "eif_rel" && ne.estimate.ci_lo <= r.oracle.delta &&
                r.oracle.delta <= ne.estimate.ci_hi)
                rel_covers++;
            if ((ne.name == "eif_abs_lasso" || ne.name == "eif_abs_boost") &&
                ne.estimate.point < 0.0)
                neg_abs++;
        }
    }
    CHECK(rel_covers >= 85);
    CHECK(neg_abs >= 1);
}

TEST_CASE("fig2 demo: the relative interval is the decisive one") {
    Fig2Result once = run_fig2_demo(3);
    CHECK(once.lambda2 > once.lambda1);
    CHECK(once.lambda1 > 0.0);
    // Reported verdicts are consistent with the reported intervals.
    CHECK(compare_absolute(once.abs1, once.abs2).decision == once.verdict_abs.decision);
    CHECK(compare_relative(once.rel).decision == once.verdict_rel.decision);
    Fig2Result again = run_fig2_demo(3);
    CHECK(once.rel.point == again.rel.point);
    CHECK(once.abs1.ci_lo == again.abs1.ci_lo);
    CHECK(once.lambda1 == again.lambda1);

    int rel_narrower = 0, abs_inc_rel_dec = 0, wrong = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        Fig2Result r = run_fig2_demo(static_cast<std::uint64_t>(seed));
        double min_abs = std::min(r.abs1.width(), r.abs2.width());
        if (r.rel.width() < min_abs) rel_narrower++;
        if (r.verdict_abs.decision == Decision::Inconclusive &&
            r.verdict_rel.decision != Decision::Inconclusive)
            abs_inc_rel_dec++;
        if (r.verdict_rel.decision != Decision::Inconclusive &&
            std::fabs(r.oracle.delta) > 3.0 * r.oracle.mc_se) {
            Decision want =
                r.oracle.delta > 0 ? Decision::SelectSecond : Decision::SelectFirst;
            if (r.verdict_rel.decision != want) wrong++;
        }
    }
    CHECK(rel_narrower >= 90);
    CHECK(abs_inc_rel_dec > 50);
    CHECK(wrong <= 5);
}

TEST_CASE("doubling the test size shrinks relative widths like root-n") {
    StudyConfig cfg;
    cfg.scenario.scenario = Scenario::A;
    cfg.scenario.d = 10;
    cfg.scenario.n_train = 300;
    cfg.scenario.n_test = 250;
    cfg.n_dgp_draws = 3;
    cfg.n_reps = 10;
    cfg.nuisance = NuisanceOption::TrueNuisance;
    cfg.methods = {Method::EifRel};
    cfg.n_oracle = 10000;
    cfg.base_seed = 11;
    MetricsTable small = run_study(cfg, 1);
    cfg.scenario.n_test = 500;
    MetricsTable big = run_study(cfg, 1);
    REQUIRE(small.rows.size() == 1);
    REQUIRE(big.rows.size() == 1);
    double ratio = big.rows[0].mean_width / small.rows[0].mean_width;
    CHECK(ratio >= 0.6);
    CHECK(ratio <= 0.8);
}

TEST_CASE("underfit nuisances break absolute coverage but not relative") {
    StudyConfig cfg;
    cfg.scenario.scenario = Scenario::A;
    cfg.scenario.d = 10;
    cfg.scenario.n_train = 300;
    cfg.scenario.n_test = 300;
    cfg.n_dgp_draws = 4;
    cfg.n_reps = 10;
    cfg.nuisance = NuisanceOption::UnderfitBoosting;
    cfg.methods = {Method::EifAbs, Method::EifRel};
    cfg.n_oracle = 10000;
    cfg.base_seed = 7;
    MetricsTable t = run_study(cfg, 1);
    double abs_cov = -1.0, rel_cov = -1.0;
    for (const MetricsRow& r : t.rows) {
        if (r.method == Method::EifAbs && r.target == "abs_lasso") abs_cov = r.coverage;
        if (r.method == Method::EifRel) rel_cov = r.coverage;
    }
    CHECK(abs_cov >= 0.0);
    CHECK(rel_cov > abs_cov);  // the qualitative Fig. 3(iii) contrast at mini scale
}
