#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catejudge/benchmark.hpp"
#include "catejudge/estimators.hpp"
#include "catejudge/types.hpp"

namespace catejudge {

enum class NuisanceOption { TrueNuisance, WellSpecifiedLinear, UnderfitBoosting };
enum class Method { PlugInAbs, EifAbs, EifRel, DinaAbs, DinaRel };

std::string to_string(NuisanceOption o);
NuisanceOption nuisance_option_from_string(const std::string& s);
std::string to_string(Method m);
Method method_from_string(const std::string& s);
bool method_is_relative(Method m);

struct StudyConfig {
    ScenarioConfig scenario;  // per-draw seeds derive from base_seed, not scenario.seed
    int n_dgp_draws = 20;
    int n_reps = 50;
    NuisanceOption nuisance = NuisanceOption::TrueNuisance;
    std::vector<Method> methods = {Method::PlugInAbs, Method::EifAbs, Method::EifRel,
                                   Method::DinaAbs, Method::DinaRel};
    double alpha = 0.10;
    int folds = 2;
    std::size_t n_oracle = 100000;
    std::uint64_t base_seed = 1;

    void validate() const;  // config_error
};

// One row per (method, target). Targets: abs_lasso / abs_boost for absolute
// methods (first = lasso T-learner, second = boosting T-learner), rel for
// relative methods. Selection columns describe the method's pair verdict and
// repeat across that method's rows; oracle ties (|delta| <= 3 mc_se) are
// excluded from the selection denominator n_selection.
struct MetricsRow {
    Method method = Method::EifRel;
    std::string target;
    std::size_t n_completed = 0;
    std::size_t n_selection = 0;
    double coverage = 0.0;
    double mean_width = 0.0;
    double mean_abs_error_of_estimate = 0.0;
    double selection_accuracy = 0.0;
    double wrong_rate = 0.0;
    double inconclusive_rate = 1.0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
    std::size_t attempted = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::vector<std::string> diagnostics;  // one entry per aborted replication batch
};

// Monte Carlo study over n_dgp_draws generative draws x n_reps test sets.
// Deterministic given base_seed for any worker count (per-draw tallies are
// reduced in draw order). n_workers 0 = CATE_JUDGE_THREADS or hardware.
MetricsTable run_study(const StudyConfig& config, int n_workers = 0);

struct NamedEstimate {
    std::string name;
    ErrorEstimate estimate;
};

// One-dataset demo with deliberately underfit outcome models: plug-in and
// EIF absolute estimates per learner plus the plug-in-implied and EIF
// relative estimates, with oracle values for overlay.
struct Fig1Result {
    std::vector<NamedEstimate> estimates;
    OracleTruth oracle;
};

Fig1Result run_fig1_demo(std::uint64_t seed);

// Similar-lasso-pair demo: absolute CIs overlap while the relative CI is
// narrow enough to decide.
struct Fig2Result {
    ErrorEstimate abs1, abs2, rel;
    ComparisonVerdict verdict_abs, verdict_rel;
    double lambda1 = 0.0, lambda2 = 0.0;
    OracleTruth oracle;
};

Fig2Result run_fig2_demo(std::uint64_t seed);

// Worker cap: explicit request, else CATE_JUDGE_THREADS, else hardware.
int resolve_worker_count(int requested, std::size_t n_tasks);

}  // namespace catejudge
