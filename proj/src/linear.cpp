#include "catejudge/linear.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "catejudge/folds.hpp"

namespace catejudge {

namespace {

struct Standardized {
    Matrix z;                          // standardized copy, constant cols zeroed
    std::vector<double> mean, sd;
};

// sd uses the population divisor n; exact-zero spread marks a constant column.
Standardized standardize(const Matrix& x) {
    const std::size_t n = x.rows, d = x.cols;
    Standardized s;
    s.z = Matrix(n, d);
    s.mean.assign(d, 0.0);
    s.sd.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        long double m = 0.0L;
        for (std::size_t i = 0; i < n; ++i) m += x(i, j);
        s.mean[j] = static_cast<double>(m / n);
        long double ss = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const long double c = x(i, j) - s.mean[j];
            ss += c * c;
        }
        s.sd[j] = std::sqrt(static_cast<double>(ss / n));
        if (s.sd[j] > 0.0) {
            for (std::size_t i = 0; i < n; ++i) s.z(i, j) = (x(i, j) - s.mean[j]) / s.sd[j];
        }
    }
    return s;
}

void check_xy(const Matrix& x, std::size_t ny, const char* who) {
    if (x.rows != ny)
        throw std::domain_error(std::string(who) + ": x has " + std::to_string(x.rows) +
                                " rows but y has " + std::to_string(ny));
    if (x.rows < 2) throw std::domain_error(std::string(who) + ": need at least 2 rows");
    if (x.cols < 1) throw std::domain_error(std::string(who) + ": need at least 1 feature");
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

double LinearModel::predict(std::span<const double> x) const {
    double out = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j) {
        if (feature_sd[j] > 0.0) out += coef[j] * (x[j] - feature_mean[j]) / feature_sd[j];
    }
    return out;
}

std::vector<double> LinearModel::predict_all(const Matrix& x) const {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
    return out;
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t k) {
    // In-place Cholesky A = L L^T; retry with growing jitter if a pivot dies.
    for (double jitter = 0.0;; jitter = (jitter == 0.0 ? 1e-10 : jitter * 100.0)) {
        std::vector<double> l = a;
        if (jitter > 0.0)
            for (std::size_t i = 0; i < k; ++i) l[i * k + i] += jitter;
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = l[i * k + j];
                for (std::size_t m = 0; m < j; ++m) s -= l[i * k + m] * l[j * k + m];
                if (i == j) {
                    if (s <= 0.0) { ok = false; break; }
                    l[i * k + i] = std::sqrt(s);
                } else {
                    l[i * k + j] = s / l[j * k + j];
                }
            }
        }
        if (!ok) {
            if (jitter > 1.0) throw std::domain_error("solve_spd: matrix is not positive definite");
            continue;
        }
        std::vector<double> z(k);
        for (std::size_t i = 0; i < k; ++i) {
            double s = b[i];
            for (std::size_t m = 0; m < i; ++m) s -= l[i * k + m] * z[m];
            z[i] = s / l[i * k + i];
        }
        for (std::size_t ii = k; ii-- > 0;) {
            double s = z[ii];
            for (std::size_t m = ii + 1; m < k; ++m) s -= l[m * k + ii] * z[m];
            z[ii] = s / l[ii * k + ii];
        }
        return z;
    }
}

LinearModel fit_ols(const Matrix& x, const std::vector<double>& y) {
    check_xy(x, y.size(), "fit_ols");
    const std::size_t n = x.rows, d = x.cols;
    Standardized s = standardize(x);

    // Centered y regressed on standardized columns; intercept recovered as ybar.
    long double ym = 0.0L;
    for (double v : y) ym += v;
    const double ybar = static_cast<double>(ym / n);

    std::vector<double> gram(d * d, 0.0), xty(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t m = j; m < d; ++m) {
            long double s2 = 0.0L;
            for (std::size_t i = 0; i < n; ++i) s2 += s.z(i, j) * s.z(i, m);
            gram[j * d + m] = gram[m * d + j] = static_cast<double>(s2);
        }
        long double s1 = 0.0L;
        for (std::size_t i = 0; i < n; ++i) s1 += s.z(i, j) * (y[i] - ybar);
        xty[j] = static_cast<double>(s1);
    }
    for (std::size_t j = 0; j < d; ++j) gram[j * d + j] += 1e-10 * n;

    LinearModel m;
    m.coef = solve_spd(std::move(gram), std::move(xty), d);
    m.intercept = ybar;
    m.feature_mean = std::move(s.mean);
    m.feature_sd = std::move(s.sd);
    for (std::size_t j = 0; j < d; ++j)
        if (m.feature_sd[j] == 0.0) m.coef[j] = 0.0;
    return m;
}

double lasso_lambda_max(const Matrix& x, const std::vector<double>& y) {
    check_xy(x, y.size(), "lasso_lambda_max");
    const std::size_t n = x.rows, d = x.cols;
    Standardized s = standardize(x);
    long double ym = 0.0L;
    for (double v : y) ym += v;
    const double ybar = static_cast<double>(ym / n);
    double best = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        long double dot = 0.0L;
        for (std::size_t i = 0; i < n; ++i) dot += s.z(i, j) * (y[i] - ybar);
        best = std::max(best, std::abs(static_cast<double>(dot)) / n);
    }
    return best;
}

namespace {

// Core CD loop on a prepared standardized design. col_norm2[j] = <z_j, z_j>/n
// (1 for active columns, 0 for constant ones).
std::vector<double> lasso_cd(const Matrix& z, const std::vector<double>& y, double ybar,
                             double lambda, std::vector<double> warm) {
    const std::size_t n = z.rows, d = z.cols;
    std::vector<double> beta = std::move(warm);
    if (beta.size() != d) beta.assign(d, 0.0);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < d; ++j) fit += z(i, j) * beta[j];
        resid[i] = y[i] - ybar - fit;
    }
    std::vector<double> col_norm2(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) s += z(i, j) * z(i, j);
        col_norm2[j] = static_cast<double>(s) / n;
    }
    const double tol = 1e-7;
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (col_norm2[j] == 0.0) continue;
            long double dot = 0.0L;
            for (std::size_t i = 0; i < n; ++i) dot += z(i, j) * resid[i];
            const double rho = static_cast<double>(dot) / n + col_norm2[j] * beta[j];
            const double bnew = soft_threshold(rho, lambda) / col_norm2[j];
            const double delta = bnew - beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * z(i, j);
                beta[j] = bnew;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change <= tol) break;
    }
    return beta;
}

}  // namespace

LinearModel fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda) {
    check_xy(x, y.size(), "fit_lasso");
    if (!(lambda >= 0.0)) throw std::domain_error("fit_lasso: lambda must be >= 0");
    const std::size_t n = x.rows;
    Standardized s = standardize(x);
    long double ym = 0.0L;
    for (double v : y) ym += v;
    const double ybar = static_cast<double>(ym / n);

    LinearModel m;
    m.coef = lasso_cd(s.z, y, ybar, lambda, {});
    m.intercept = ybar;
    m.feature_mean = std::move(s.mean);
    m.feature_sd = std::move(s.sd);
    return m;
}

LassoCvResult fit_lasso_cv(const Matrix& x, const std::vector<double>& y, int cv_folds) {
    check_xy(x, y.size(), "fit_lasso_cv");
    const std::size_t n = x.rows;

    LassoCvResult out;
    const double lmax = lasso_lambda_max(x, y);
    const int grid_size = 50;
    out.grid.resize(grid_size);
    if (lmax == 0.0) {
        out.grid.assign(grid_size, 0.0);
    } else {
        // log-spaced from lmax down to 1e-3 * lmax
        const double lo = std::log(1e-3 * lmax), hi = std::log(lmax);
        for (int g = 0; g < grid_size; ++g)
            out.grid[g] = std::exp(hi + (lo - hi) * g / (grid_size - 1));
    }

    // Too little data to cross-validate: take the smallest grid lambda.
    int k = cv_folds;
    if (static_cast<std::size_t>(2 * k) > n) k = static_cast<int>(n / 2);
    if (k < 2) {
        out.lambda = out.grid.back();
        out.cv_mse.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
        out.model = fit_lasso(x, y, out.lambda);
        return out;
    }

    FoldAssignment folds = make_folds(n, k, /*seed=*/0x1a550u);
    std::vector<long double> sse(grid_size, 0.0L);
    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < n; ++i) (folds.fold_of[i] == f ? te : tr).push_back(i);
        Matrix xt(tr.size(), x.cols);
        std::vector<double> yt(tr.size());
        for (std::size_t r = 0; r < tr.size(); ++r) {
            yt[r] = y[tr[r]];
            for (std::size_t j = 0; j < x.cols; ++j) xt(r, j) = x(tr[r], j);
        }
        Standardized s = standardize(xt);
        long double ym = 0.0L;
        for (double v : yt) ym += v;
        const double ybar = static_cast<double>(ym / yt.size());

        std::vector<double> warm;  // warm-start down the grid (large -> small lambda)
        for (int g = 0; g < grid_size; ++g) {
            warm = lasso_cd(s.z, yt, ybar, out.grid[g], std::move(warm));
            for (std::size_t idx : te) {
                double pred = ybar;
                for (std::size_t j = 0; j < x.cols; ++j)
                    if (s.sd[j] > 0.0) pred += warm[j] * (x(idx, j) - s.mean[j]) / s.sd[j];
                const double e = y[idx] - pred;
                sse[g] += static_cast<long double>(e) * e;
            }
        }
    }
    out.cv_mse.resize(grid_size);
    int best = 0;
    for (int g = 0; g < grid_size; ++g) {
        out.cv_mse[g] = static_cast<double>(sse[g] / n);
        if (out.cv_mse[g] < out.cv_mse[best]) best = g;  // ties keep larger lambda
    }
    out.lambda = out.grid[best];
    out.model = fit_lasso(x, y, out.lambda);
    return out;
}

double PropensityModel::predict(std::span<const double> x) const {
    const double z = logit.predict(x);
    const double p = 1.0 / (1.0 + std::exp(-z));
    return std::clamp(p, clip_eps, 1.0 - clip_eps);
}

std::vector<double> PropensityModel::predict_all(const Matrix& x) const {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
    return out;
}

PropensityModel fit_logistic(const Matrix& x, const std::vector<int>& w, double clip_eps) {
    check_xy(x, w.size(), "fit_logistic");
    if (!(clip_eps > 0.0 && clip_eps < 0.5))
        throw config_error("fit_logistic: clip_eps must be in (0, 0.5)");
    const std::size_t n = x.rows, d = x.cols;
    for (std::size_t i = 0; i < n; ++i)
        if (w[i] != 0 && w[i] != 1)
            throw config_error("fit_logistic: w[" + std::to_string(i) + "] is not 0/1");

    PropensityModel pm;
    pm.clip_eps = clip_eps;

    std::size_t n1 = 0;
    for (int v : w) n1 += static_cast<std::size_t>(v);
    Standardized s = standardize(x);
    pm.logit.feature_mean = s.mean;
    pm.logit.feature_sd = s.sd;
    pm.logit.coef.assign(d, 0.0);
    if (n1 == 0 || n1 == n) {
        // Degenerate arm: constant fit at the clipped empirical rate.
        const double p = std::clamp(static_cast<double>(n1) / n, clip_eps, 1.0 - clip_eps);
        pm.logit.intercept = std::log(p / (1.0 - p));
        return pm;
    }

    // Newton on [intercept, beta] with ridge 1e-6 on beta only.
    const std::size_t k = d + 1;
    std::vector<double> theta(k, 0.0);
    theta[0] = std::log(static_cast<double>(n1) / (n - n1));
    const double ridge = 1e-6;
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> grad(k, 0.0), hess(k * k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = theta[0];
            for (std::size_t j = 0; j < d; ++j) eta += theta[j + 1] * s.z(i, j);
            const double p = 1.0 / (1.0 + std::exp(-eta));
            const double r = w[i] - p;
            const double v = std::max(p * (1.0 - p), 1e-12);
            grad[0] += r;
            hess[0] += v;
            for (std::size_t j = 0; j < d; ++j) {
                grad[j + 1] += r * s.z(i, j);
                hess[(j + 1) * k] += v * s.z(i, j);
                for (std::size_t m = 0; m <= j; ++m)
                    hess[(j + 1) * k + (m + 1)] += v * s.z(i, j) * s.z(i, m);
            }
        }
        for (std::size_t j = 1; j < k; ++j) {
            grad[j] -= ridge * theta[j];
            hess[j * k + j] += ridge;
            hess[j] = hess[j * k];  // mirror column 0
            for (std::size_t m = 1; m < j; ++m) hess[m * k + j] = hess[j * k + m];
        }
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < 1e-8) break;
        std::vector<double> step = solve_spd(std::move(hess), std::move(grad), k);
        for (std::size_t j = 0; j < k; ++j) theta[j] += step[j];
    }
    pm.logit.intercept = theta[0];
    for (std::size_t j = 0; j < d; ++j) pm.logit.coef[j] = theta[j + 1];
    return pm;
}

}  // namespace catejudge
