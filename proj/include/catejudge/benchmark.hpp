#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catejudge/learners.hpp"
#include "catejudge/types.hpp"

namespace catejudge {

// Scenario grid of the synthetic benchmark: mean functions are linear for
// A/C and nonlinear for B/D; the propensity logit score is linear for A/B
// and nonlinear for C/D.
enum class Scenario { A, B, C, D };

Scenario scenario_from_string(const std::string& s);  // "a".."d", case-insensitive
std::string to_string(Scenario s);

struct ScenarioConfig {
    Scenario scenario = Scenario::A;
    std::size_t d = 20;
    double active_fraction = 0.2;  // active set size = max(1, floor(fraction * d))
    double noise_sd = 1.0;
    std::size_t n_train = 700;
    std::size_t n_test = 500;
    std::uint64_t seed = 1;

    std::size_t active_count() const;
    void validate() const;  // config_error; requires d >= 5
};

// Sparse polynomial over the active coordinates: intercept + linear terms,
// plus squares and pairwise interactions (upper triangle, p < q) when the
// part is nonlinear (sq/cross non-empty).
struct SparseFn {
    double intercept = 0.0;
    std::vector<double> lin;
    std::vector<double> sq;
    std::vector<double> cross;

    bool is_linear() const { return sq.empty() && cross.empty(); }
    double eval(std::span<const double> x, const std::vector<std::size_t>& active) const;
};

// Fully data-defined generative model, serializable for reuse across runs.
struct DgpSpec {
    Scenario scenario = Scenario::A;
    std::size_t d = 0;
    std::vector<std::size_t> active;
    SparseFn mu0, mu1, escore;

    double mu0_fn(std::span<const double> x) const { return mu0.eval(x, active); }
    double mu1_fn(std::span<const double> x) const { return mu1.eval(x, active); }
    double tau(std::span<const double> x) const { return mu1_fn(x) - mu0_fn(x); }
    // clamp(sigmoid(escore(x) / 2), 0.05, 0.95)
    double e_fn(std::span<const double> x) const;
};

struct OracleTruth {
    double phi1 = 0.0;  // true absolute error of the first candidate
    double phi2 = 0.0;
    double delta = 0.0;  // phi1 - phi2 on the same oracle sample
    double mc_se = 0.0;  // Monte Carlo SE of delta
    std::size_t n_oracle = 0;
};

struct SampledData {
    TestDataset data;
    std::vector<double> oracle_tau;
};

// Draws sparse coefficients for the scenario's linearity pattern.
// Deterministic given config.seed. Covariates are iid standard normal.
DgpSpec gen_scenario(const ScenarioConfig& config);

// X per dgp, W ~ Bernoulli(e(X)), Y = mu_W(X) + Normal(0, noise_sd^2).
SampledData sample_dataset(const DgpSpec& dgp, std::size_t n, double noise_sd,
                           std::uint64_t seed);

using HteFunction = Predictor;

// Oracle errors phi_k = E[(tau_k(X) - tau(X))^2] over a fresh covariate
// sample of size n_oracle (>= 10^4).
OracleTruth true_errors(const DgpSpec& dgp, const HteFunction& tau1_fn,
                        const HteFunction& tau2_fn, std::size_t n_oracle, std::uint64_t seed);

// Per-arm fits on the training split, differenced. Empty arm: domain error.
HteFunction make_t_learner(const TestDataset& train, const LearnerSpec& family);

// Two lasso T-learners differing only in the penalty; lambda1 == lambda2 is
// rejected.
std::pair<HteFunction, HteFunction> make_similar_pair(const TestDataset& train, double lambda1,
                                                      double lambda2);

HtePredictions materialize(const HteFunction& fn, const Matrix& x, const std::string& label);

// Oracle nuisances evaluated from the DGP itself (clip_eps 0.01; the DGP's
// e-range [0.05, 0.95] never trips it).
NuisanceFit predict_true_nuisance(const DgpSpec& dgp, const TestDataset& data);

}  // namespace catejudge
