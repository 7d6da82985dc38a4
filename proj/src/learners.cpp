#include "catejudge/learners.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "catejudge/linear.hpp"

namespace catejudge {

std::string LearnerSpec::name() const {
    switch (family) {
        case Family::Ols: return "ols";
        case Family::Lasso: return lambda >= 0.0 ? "lasso" : "lasso_cv";
        case Family::Boosting: return "boosting";
    }
    return "unknown";
}


Predictor fit_outcome_learner(const LearnerSpec& spec, const Matrix& x,
                              const std::vector<double>& y) {
    if (x.rows != y.size())
        throw std::domain_error("fit_outcome_learner: x has " + std::to_string(x.rows) +
                                " rows but y has " + std::to_string(y.size()));
    if (y.empty()) throw std::domain_error("fit_outcome_learner: empty training set");

    // Linear/tree fits need >= 2 rows; a singleton can only be its own mean.
    if (y.size() < 2) {
        const double m = y[0];
        return [m](std::span<const double>) { return m; };
    }
    switch (spec.family) {
        case LearnerSpec::Family::Ols: {
            auto m = std::make_shared<LinearModel>(fit_ols(x, y));
            return [m](std::span<const double> r) { return m->predict(r); };
        }
        case LearnerSpec::Family::Lasso: {
            auto m = std::make_shared<LinearModel>(
                spec.lambda >= 0.0 ? fit_lasso(x, y, spec.lambda)
                                   : fit_lasso_cv(x, y, spec.cv_folds).model);
            return [m](std::span<const double> r) { return m->predict(r); };
        }
        case LearnerSpec::Family::Boosting: {
            auto m = std::make_shared<BoostModel>(fit_boosting(x, y, spec.boost));
            return [m](std::span<const double> r) { return m->predict(r); };
        }
    }
    throw config_error("fit_outcome_learner: unsupported family");
}

Predictor fit_propensity_learner(const LearnerSpec& spec, const Matrix& x,
                                 const std::vector<int>& w, double clip_eps) {
    if (x.rows != w.size())
        throw std::domain_error("fit_propensity_learner: x has " + std::to_string(x.rows) +
                                " rows but w has " + std::to_string(w.size()));
    if (w.empty()) throw std::domain_error("fit_propensity_learner: empty training set");
    if (!(clip_eps > 0.0 && clip_eps < 0.5))
        throw config_error("fit_propensity_learner: clip_eps must be in (0, 0.5)");

    std::size_t n1 = 0;
    for (int v : w) n1 += static_cast<std::size_t>(v != 0);
    if (w.size() < 2 || n1 == 0 || n1 == w.size()) {
        // Degenerate labels: clipped empirical rate, never an error.
        const double p =
            std::clamp(static_cast<double>(n1) / w.size(), clip_eps, 1.0 - clip_eps);
        return [p](std::span<const double>) { return p; };
    }
    if (spec.family == LearnerSpec::Family::Boosting) {
        std::vector<double> y01(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) y01[i] = static_cast<double>(w[i]);
        auto m = std::make_shared<BoostModel>(fit_boosting(x, y01, spec.boost));
        return [m, clip_eps](std::span<const double> r) {
            return std::clamp(m->predict(r), clip_eps, 1.0 - clip_eps);
        };
    }
    // Ols and Lasso both map to the logistic fit on the propensity side.
    auto m = std::make_shared<PropensityModel>(fit_logistic(x, w, clip_eps));
    return [m](std::span<const double> r) { return m->predict(r); };
}

NuisanceFit cross_fit(const TestDataset& data, const FoldAssignment& folds,
                      const LearnerSpec& outcome_spec, const LearnerSpec& propensity_spec) {
    data.validate();
    const std::size_t n = data.n(), d = data.d();
    if (folds.fold_of.size() != n)
        throw config_error("cross_fit: fold assignment covers " +
                           std::to_string(folds.fold_of.size()) + " units but dataset has " +
                           std::to_string(n));
    const double clip_eps = propensity_spec.clip_eps;
    if (!(clip_eps > 0.0 && clip_eps < 0.5))
        throw config_error("cross_fit: clip_eps must be in (0, 0.5)");

    NuisanceFit fit;
    fit.clip_eps = clip_eps;
    fit.mu0_hat.assign(n, 0.0);
    fit.mu1_hat.assign(n, 0.0);
    fit.e_hat.assign(n, 0.0);

    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train, eval;
        for (std::size_t i = 0; i < n; ++i) (folds.fold_of[i] == f ? eval : train).push_back(i);
        if (eval.empty()) continue;

        Matrix xt(train.size(), d);
        std::vector<int> wt(train.size());
        std::vector<double> yt(train.size());
        std::vector<std::size_t> arm0, arm1;  // row indices into xt
        for (std::size_t r = 0; r < train.size(); ++r) {
            const std::size_t i = train[r];
            wt[r] = data.w[i];
            yt[r] = data.y[i];
            for (std::size_t j = 0; j < d; ++j) xt(r, j) = data.x(i, j);
            (wt[r] == 1 ? arm1 : arm0).push_back(r);
        }
        if (arm0.empty() || arm1.empty())
            throw config_error("cross_fit: complement of fold " + std::to_string(f) +
                               " has an empty treatment arm");

        auto arm_predictor = [&](const std::vector<std::size_t>& arm) {
            Matrix xa(arm.size(), d);
            std::vector<double> ya(arm.size());
            for (std::size_t r = 0; r < arm.size(); ++r) {
                ya[r] = yt[arm[r]];
                for (std::size_t j = 0; j < d; ++j) xa(r, j) = xt(arm[r], j);
            }
            return fit_outcome_learner(outcome_spec, xa, ya);
        };

        Predictor mu0 = arm_predictor(arm0);
        Predictor mu1 = arm_predictor(arm1);
        Predictor e = fit_propensity_learner(propensity_spec, xt, wt, clip_eps);

        for (std::size_t i : eval) {
            auto row = data.x.row(i);
            fit.mu0_hat[i] = mu0(row);
            fit.mu1_hat[i] = mu1(row);
            fit.e_hat[i] = e(row);
        }
    }
    return fit;
}

}  // namespace catejudge
