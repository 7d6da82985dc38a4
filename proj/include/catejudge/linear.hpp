#pragma once

#include <span>
#include <vector>

#include "catejudge/types.hpp"

namespace catejudge {

// Affine model over raw features, fitted on standardized columns. Columns
// with zero spread keep sd = 0 and a zero coefficient.
struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coef;  // on the standardized scale
    std::vector<double> feature_mean;
    std::vector<double> feature_sd;

    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Matrix& x) const;
};

// Least squares via normal equations (tiny ridge for rank safety).
LinearModel fit_ols(const Matrix& x, const std::vector<double>& y);

// Cyclic coordinate descent for (1/2n)||y - b0 - Xb||^2 + lambda*||b||_1,
// tolerance 1e-7 in max coefficient change. Requires n >= 2, lambda >= 0.
LinearModel fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda);

// max_j |<x_j, y - ybar>| / n over standardized columns; the smallest lambda
// whose solution is all-zero.
double lasso_lambda_max(const Matrix& x, const std::vector<double>& y);

struct LassoCvResult {
    LinearModel model;
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> cv_mse;
};

// K-fold CV over a 50-point log grid from lambda_max down to 1e-3*lambda_max;
// picks the MSE-minimizing lambda (ties toward the larger lambda) and refits
// on all data.
LassoCvResult fit_lasso_cv(const Matrix& x, const std::vector<double>& y, int cv_folds = 5);

// Logistic model on the logit scale; predictions are clamped to
// [clip_eps, 1 - clip_eps].
struct PropensityModel {
    LinearModel logit;
    double clip_eps = 0.01;

    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Matrix& x) const;
};

// Ridge-stabilized (1e-6, intercept unpenalized) logistic MLE via Newton
// iterations. Single-class input degenerates to the clipped empirical rate.
PropensityModel fit_logistic(const Matrix& x, const std::vector<int>& w, double clip_eps);

// Solves A z = b for symmetric positive definite A (dim k), Cholesky with
// diagonal jitter escalation on failure.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t k);

}  // namespace catejudge
