#pragma once

#include <functional>
#include <string>

#include "catejudge/trees.hpp"
#include "catejudge/types.hpp"

namespace catejudge {

// Row-wise prediction closure over raw features.
using Predictor = std::function<double(std::span<const double>)>;

struct LearnerSpec {
    enum class Family { Ols, Lasso, Boosting };
    Family family = Family::Lasso;
    double lambda = -1.0;   // Lasso: fixed penalty when >= 0, otherwise CV-selected
    int cv_folds = 5;       // Lasso CV
    BoostParams boost;      // consulted only for Family::Boosting
    double clip_eps = 0.01; // consulted only on propensity duty

    std::string name() const;
};

// Fits a conditional-mean learner for a continuous response. A singleton
// training set degenerates to a constant at its own response.
Predictor fit_outcome_learner(const LearnerSpec& spec, const Matrix& x,
                              const std::vector<double>& y);

// Fits a propensity learner for a binary treatment. Linear families use
// logistic regression; Boosting fits squared loss to the 0/1 labels. All
// predictions are clamped to [clip_eps, 1 - clip_eps].
Predictor fit_propensity_learner(const LearnerSpec& spec, const Matrix& x,
                                 const std::vector<int>& w, double clip_eps);

// K-fold cross-fitted nuisance estimates: unit i's (mu0, mu1, e) come from
// models trained on the folds not containing i, with per-arm outcome fits.
// A training complement with an empty arm raises config_error naming the fold.
NuisanceFit cross_fit(const TestDataset& data, const FoldAssignment& folds,
                      const LearnerSpec& outcome_spec, const LearnerSpec& propensity_spec);

}  // namespace catejudge
