#include "catejudge/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "catejudge/linear.hpp"
#include "catejudge/rng.hpp"

namespace catejudge {

Scenario scenario_from_string(const std::string& s) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "a") return Scenario::A;
    if (t == "b") return Scenario::B;
    if (t == "c") return Scenario::C;
    if (t == "d") return Scenario::D;
    throw config_error("unknown scenario '" + s + "' (expected a, b, c, or d)");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::A: return "a";
        case Scenario::B: return "b";
        case Scenario::C: return "c";
        case Scenario::D: return "d";
    }
    return "?";
}

std::size_t ScenarioConfig::active_count() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(active_fraction * d));
}

void ScenarioConfig::validate() const {
    if (d < 5) throw config_error("scenario requires d >= 5, got " + std::to_string(d));
    if (!(active_fraction > 0.0 && active_fraction <= 0.2))
        throw config_error("active_fraction must lie in (0, 0.2]");
    if (!(noise_sd >= 0.0)) throw config_error("noise_sd must be >= 0");
    if (n_train < 2 || n_test < 2) throw config_error("n_train and n_test must be >= 2");
}

double SparseFn::eval(std::span<const double> x, const std::vector<std::size_t>& active) const {
    double out = intercept;
    const std::size_t m = active.size();
    for (std::size_t p = 0; p < m; ++p) out += lin[p] * x[active[p]];
    if (!sq.empty())
        for (std::size_t p = 0; p < m; ++p) out += sq[p] * x[active[p]] * x[active[p]];
    if (!cross.empty()) {
        std::size_t t = 0;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q, ++t) out += cross[t] * x[active[p]] * x[active[q]];
    }
    return out;
}

double DgpSpec::e_fn(std::span<const double> x) const {
    const double s = escore.eval(x, active) / 2.0;
    const double p = 1.0 / (1.0 + std::exp(-s));
    return std::clamp(p, 0.05, 0.95);
}

namespace {

SparseFn draw_sparse_fn(rng::Stream& st, std::size_t m, bool nonlinear) {
    SparseFn f;
    f.intercept = 2.0 * st.next_double() - 1.0;
    f.lin.resize(m);
    for (double& c : f.lin) c = 2.0 * st.next_double() - 1.0;
    if (nonlinear) {
        f.sq.resize(m);
        for (double& c : f.sq) c = st.next_double() - 0.5;
        f.cross.resize(m * (m - 1) / 2);
        for (double& c : f.cross) c = st.next_double() - 0.5;
    }
    return f;
}

}  // namespace

DgpSpec gen_scenario(const ScenarioConfig& config) {
    config.validate();
    DgpSpec dgp;
    dgp.scenario = config.scenario;
    dgp.d = config.d;

    const std::size_t m = config.active_count();
    std::vector<std::size_t> perm(config.d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng::Stream pick(config.seed, "dgp-active");
    pick.shuffle(perm);
    dgp.active.assign(perm.begin(), perm.begin() + m);
    std::sort(dgp.active.begin(), dgp.active.end());

    const bool mu_nonlinear = config.scenario == Scenario::B || config.scenario == Scenario::D;
    const bool e_nonlinear = config.scenario == Scenario::C || config.scenario == Scenario::D;
    rng::Stream s0(config.seed, "dgp-mu0"), s1(config.seed, "dgp-mu1"), se(config.seed, "dgp-e");
    dgp.mu0 = draw_sparse_fn(s0, m, mu_nonlinear);
    dgp.mu1 = draw_sparse_fn(s1, m, mu_nonlinear);
    dgp.escore = draw_sparse_fn(se, m, e_nonlinear);
    return dgp;
}

SampledData sample_dataset(const DgpSpec& dgp, std::size_t n, double noise_sd,
                           std::uint64_t seed) {
    if (n < 2) throw config_error("sample_dataset: n must be >= 2");
    SampledData out;
    out.data.x = Matrix(n, dgp.d);
    out.data.w.resize(n);
    out.data.y.resize(n);
    out.oracle_tau.resize(n);

    rng::Stream sx(seed, "sample-x"), sw(seed, "sample-w"), seps(seed, "sample-eps");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dgp.d; ++j) out.data.x(i, j) = sx.next_normal();
        auto row = out.data.x.row(i);
        const double e = dgp.e_fn(row);
        const int w = sw.next_bernoulli(e) ? 1 : 0;
        const double mu = (w == 1) ? dgp.mu1_fn(row) : dgp.mu0_fn(row);
        out.data.w[i] = w;
        out.data.y[i] = mu + noise_sd * seps.next_normal();
        out.oracle_tau[i] = dgp.tau(row);
    }
    return out;
}

OracleTruth true_errors(const DgpSpec& dgp, const HteFunction& tau1_fn,
                        const HteFunction& tau2_fn, std::size_t n_oracle, std::uint64_t seed) {
    if (n_oracle < 10000)
        throw config_error("true_errors: n_oracle must be >= 10000, got " +
                           std::to_string(n_oracle));
    rng::Stream sx(seed, "oracle-x");
    std::vector<double> x(dgp.d);
    long double s1 = 0.0L, s2 = 0.0L, sd_ = 0.0L, sd2 = 0.0L;
    for (std::size_t i = 0; i < n_oracle; ++i) {
        for (std::size_t j = 0; j < dgp.d; ++j) x[j] = sx.next_normal();
        const double t = dgp.tau(x);
        const double e1 = tau1_fn(x) - t, e2 = tau2_fn(x) - t;
        const double d1 = e1 * e1, d2 = e2 * e2;
        s1 += d1;
        s2 += d2;
        sd_ += d1 - d2;
        sd2 += static_cast<long double>(d1 - d2) * (d1 - d2);
    }
    OracleTruth truth;
    truth.n_oracle = n_oracle;
    truth.phi1 = static_cast<double>(s1 / n_oracle);
    truth.phi2 = static_cast<double>(s2 / n_oracle);
    truth.delta = truth.phi1 - truth.phi2;
    const double md = static_cast<double>(sd_ / n_oracle);
    const double var = std::max(0.0, static_cast<double>(sd2 / n_oracle) - md * md);
    truth.mc_se = std::sqrt(var / n_oracle);
    return truth;
}

HteFunction make_t_learner(const TestDataset& train, const LearnerSpec& family) {
    const std::size_t n = train.n(), d = train.d();
    std::vector<std::size_t> arm0, arm1;
    for (std::size_t i = 0; i < n; ++i) (train.w[i] == 1 ? arm1 : arm0).push_back(i);
    if (arm0.empty() || arm1.empty())
        throw std::domain_error("make_t_learner: a treatment arm is empty");

    auto fit_arm = [&](const std::vector<std::size_t>& arm) {
        Matrix xa(arm.size(), d);
        std::vector<double> ya(arm.size());
        for (std::size_t r = 0; r < arm.size(); ++r) {
            ya[r] = train.y[arm[r]];
            for (std::size_t j = 0; j < d; ++j) xa(r, j) = train.x(arm[r], j);
        }
        return fit_outcome_learner(family, xa, ya);
    };
    Predictor f0 = fit_arm(arm0);
    Predictor f1 = fit_arm(arm1);
    return [f0, f1](std::span<const double> x) { return f1(x) - f0(x); };
}

std::pair<HteFunction, HteFunction> make_similar_pair(const TestDataset& train, double lambda1,
                                                      double lambda2) {
    if (lambda1 == lambda2)
        throw config_error("make_similar_pair: lambda1 and lambda2 must differ");
    LearnerSpec a, b;
    a.family = b.family = LearnerSpec::Family::Lasso;
    a.lambda = lambda1;
    b.lambda = lambda2;
    return {make_t_learner(train, a), make_t_learner(train, b)};
}

HtePredictions materialize(const HteFunction& fn, const Matrix& x, const std::string& label) {
    HtePredictions p;
    p.label = label;
    p.values.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) p.values[i] = fn(x.row(i));
    return p;
}

NuisanceFit predict_true_nuisance(const DgpSpec& dgp, const TestDataset& data) {
    const std::size_t n = data.n();
    NuisanceFit nf;
    nf.clip_eps = 0.01;
    nf.mu0_hat.resize(n);
    nf.mu1_hat.resize(n);
    nf.e_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = data.x.row(i);
        nf.mu0_hat[i] = dgp.mu0_fn(row);
        nf.mu1_hat[i] = dgp.mu1_fn(row);
        nf.e_hat[i] = dgp.e_fn(row);
    }
    return nf;
}

}  // namespace catejudge
