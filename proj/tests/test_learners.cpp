#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "catejudge/folds.hpp"
#include "catejudge/learners.hpp"
#include "catejudge/linear.hpp"
#include "catejudge/rng.hpp"
#include "catejudge/trees.hpp"
#include "catejudge/types.hpp"

using namespace catejudge;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, rng::Stream& s) {
    Matrix x(n, d);
    for (double& v : x.data) v = s.next_normal();
    return x;
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return static_cast<double>(acc / a.size());
}

}  // namespace

TEST_CASE("ols recovers an exact affine function") {
    rng::Stream s(1, "ols-exact");
    Matrix x = random_matrix(40, 3, s);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i)
        y[i] = 3.0 + 2.0 * x(i, 0) - 0.5 * x(i, 1) + 0.25 * x(i, 2);
    LinearModel m = fit_ols(x, y);
    for (std::size_t i = 0; i < 40; ++i)
        CHECK(m.predict(x.row(i)) == doctest::Approx(y[i]).epsilon(1e-7));
}

TEST_CASE("lasso with zero penalty fits an exact line") {
    Matrix x(6, 1);
    std::vector<double> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
        x(i, 0) = static_cast<double>(i) - 2.5;
        y[i] = 1.0 + 2.0 * x(i, 0);
    }
    LinearModel m = fit_lasso(x, y, 0.0);
    // Raw-scale slope and intercept via predictions.
    double slope = (m.predict(x.row(5)) - m.predict(x.row(0))) / (x(5, 0) - x(0, 0));
    double at_zero = m.predict(std::vector<double>{0.0});
    CHECK(slope == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(at_zero == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lasso at lambda_max collapses to the mean") {
    rng::Stream s(2, "lasso-max");
    Matrix x = random_matrix(50, 4, s);
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = 1.5 * x(i, 0) + s.next_normal();
    double lmax = lasso_lambda_max(x, y);
    CHECK(lmax > 0.0);
    double ybar = std::accumulate(y.begin(), y.end(), 0.0) / 50.0;
    for (double mult : {1.0, 1.5, 10.0}) {
        LinearModel m = fit_lasso(x, y, mult * lmax);
        for (double c : m.coef) CHECK(c == 0.0);
        CHECK(m.predict(x.row(7)) == doctest::Approx(ybar).epsilon(1e-12));
    }
    // Just below lambda_max at least one coefficient activates.
    LinearModel below = fit_lasso(x, y, 0.99 * lmax);
    double linf = 0.0;
    for (double c : below.coef) linf = std::max(linf, std::fabs(c));
    CHECK(linf > 0.0);
}

TEST_CASE("lasso solutions satisfy the KKT conditions") {
    // Subgradient optimality on the standardized scale:
    //   <z_j, r>/n = lambda * sign(beta_j) when beta_j != 0, |.| <= lambda otherwise.
    rng::Stream s(3, "lasso-kkt");
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 30 + s.next_below(60), d = 2 + s.next_below(7);
        Matrix x = random_matrix(n, d, s);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = 2.0 * x(i, 0) - 1.0 * x(i, 1 % d) + 0.5 * s.next_normal();
        double lambda = 0.02 + 0.2 * s.next_double();
        LinearModel m = fit_lasso(x, y, lambda);

        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - m.predict(x.row(i));
        for (std::size_t j = 0; j < d; ++j) {
            if (m.feature_sd[j] == 0.0) continue;
            long double g = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                g += (x(i, j) - m.feature_mean[j]) / m.feature_sd[j] * r[i];
            double gj = static_cast<double>(g) / static_cast<double>(n);
            if (m.coef[j] != 0.0) {
                CHECK(std::fabs(gj - lambda * (m.coef[j] > 0 ? 1.0 : -1.0)) <= 1e-6);
            } else {
                CHECK(std::fabs(gj) <= lambda + 1e-6);
            }
        }
    }
}

TEST_CASE("lasso cv picks from the grid and refits on all data") {
    rng::Stream s(4, "lasso-cv");
    Matrix x = random_matrix(120, 8, s);
    std::vector<double> y(120);
    for (std::size_t i = 0; i < 120; ++i)
        y[i] = 3.0 * x(i, 0) - 2.0 * x(i, 1) + 0.3 * s.next_normal();
    LassoCvResult cv = fit_lasso_cv(x, y, 5);
    REQUIRE(cv.grid.size() == 50);
    REQUIRE(cv.cv_mse.size() == 50);
    CHECK(std::count(cv.grid.begin(), cv.grid.end(), cv.lambda) == 1);
    // Strong signal: the chosen penalty sits strictly below lambda_max.
    CHECK(cv.lambda < lasso_lambda_max(x, y));
    // The refit model matches a direct fit at the chosen penalty.
    LinearModel direct = fit_lasso(x, y, cv.lambda);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(cv.model.predict(x.row(i)) == doctest::Approx(direct.predict(x.row(i))).epsilon(1e-12));
    // Determinism.
    LassoCvResult cv2 = fit_lasso_cv(x, y, 5);
    CHECK(cv.lambda == cv2.lambda);
    CHECK(cv.cv_mse == cv2.cv_mse);
}

TEST_CASE("lasso rejects invalid shapes and penalties") {
    Matrix x(5, 2);
    std::vector<double> y(5, 1.0);
    CHECK_THROWS_AS(fit_lasso(x, y, -0.5), std::domain_error);
    std::vector<double> short_y(4, 1.0);
    CHECK_THROWS_AS(fit_lasso(x, short_y, 0.1), std::domain_error);
    Matrix one_row(1, 2);
    std::vector<double> one_y(1, 0.0);
    CHECK_THROWS_AS(fit_lasso(one_row, one_y, 0.1), std::domain_error);
}

TEST_CASE("logistic regression degenerates to the clipped rate") {
    Matrix x(8, 1);  // constant column: no usable signal
    std::vector<int> all_one(8, 1);
    PropensityModel m1 = fit_logistic(x, all_one, 0.01);
    CHECK(m1.predict(x.row(0)) == doctest::Approx(0.99).epsilon(1e-12));
    std::vector<int> all_zero(8, 0);
    PropensityModel m0 = fit_logistic(x, all_zero, 0.01);
    CHECK(m0.predict(x.row(0)) == doctest::Approx(0.01).epsilon(1e-12));
    std::vector<int> mixed = {1, 1, 1, 0, 0, 0, 1, 0};  // rate 0.5
    PropensityModel mh = fit_logistic(x, mixed, 0.01);
    CHECK(mh.predict(x.row(0)) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("logistic regression finds a monotone signal") {
    rng::Stream s(5, "logit-mono");
    std::size_t n = 400;
    Matrix x = random_matrix(n, 2, s);
    std::vector<int> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = s.next_bernoulli(1.0 / (1.0 + std::exp(-2.0 * x(i, 0)))) ? 1 : 0;
    PropensityModel m = fit_logistic(x, w, 0.01);
    double lo = m.predict(std::vector<double>{-2.0, 0.0});
    double hi = m.predict(std::vector<double>{2.0, 0.0});
    CHECK(hi > lo + 0.3);
    for (std::size_t i = 0; i < n; ++i) {
        double p = m.predict(x.row(i));
        CHECK(p >= 0.01);
        CHECK(p <= 0.99);
    }
    std::vector<int> bad = {0, 1, 2, 0};
    Matrix xb(4, 2);
    CHECK_THROWS_AS(fit_logistic(xb, bad, 0.01), config_error);
}

TEST_CASE("boosting with zero rounds predicts the mean") {
    rng::Stream s(6, "boost-mean");
    Matrix x = random_matrix(30, 3, s);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = s.next_normal() + 2.0;
    double ybar = std::accumulate(y.begin(), y.end(), 0.0) / 30.0;
    BoostModel m = fit_boosting(x, y, BoostParams{2, 0, 0.3});
    CHECK(m.trees.empty());
    CHECK(m.predict(x.row(3)) == doctest::Approx(ybar).epsilon(1e-12));
}

TEST_CASE("a single full-rate stump nails a step function") {
    Matrix x(10, 2);
    std::vector<double> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = static_cast<double>(i) - 4.5;  // distinct values straddling 0
        x(i, 1) = 0.0;
        y[i] = x(i, 0) > 0.0 ? 1.0 : 0.0;
    }
    BoostModel m = fit_boosting(x, y, BoostParams{1, 1, 1.0});
    REQUIRE(m.trees.size() == 1);
    std::vector<double> pred = m.predict_all(x);
    CHECK(mse(pred, y) <= 1e-24);
    // Independent check of the chosen split: it must separate the classes.
    const auto& root = m.trees[0].nodes[0];
    CHECK(root.feature == 0);
    CHECK(root.threshold > -0.5);
    CHECK(root.threshold < 0.5);
}

TEST_CASE("boosting training error is non-increasing in rounds") {
    rng::Stream s(7, "boost-mono");
    for (int rep = 0; rep < 5; ++rep) {
        std::size_t n = 60;
        Matrix x = random_matrix(n, 4, s);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = std::sin(x(i, 0)) + 0.5 * x(i, 1) * x(i, 2) + 0.2 * s.next_normal();
        BoostModel full = fit_boosting(x, y, BoostParams{2, 25, 0.3});
        // Prefix models share the fitted trees; evaluate each truncation.
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= full.trees.size(); ++k) {
            std::vector<double> pred(n, full.base);
            for (std::size_t t = 0; t < k; ++t)
                for (std::size_t i = 0; i < n; ++i)
                    pred[i] += full.learning_rate * full.trees[t].predict(x.row(i));
            double cur = mse(pred, y);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("boosting validates hyperparameters and shapes") {
    Matrix x(5, 2);
    std::vector<double> y(5, 1.0);
    CHECK_THROWS_AS(fit_boosting(x, y, BoostParams{0, 10, 0.3}), config_error);
    CHECK_THROWS_AS(fit_boosting(x, y, BoostParams{2, -1, 0.3}), config_error);
    CHECK_THROWS_AS(fit_boosting(x, y, BoostParams{2, 10, 0.0}), config_error);
    std::vector<double> short_y(3, 1.0);
    CHECK_THROWS_AS(fit_boosting(x, short_y, BoostParams{2, 10, 0.3}), std::domain_error);
}

TEST_CASE("outcome learner degenerates gracefully on a singleton") {
    Matrix x(1, 3);
    x(0, 0) = 1.0;
    std::vector<double> y = {4.5};
    for (auto fam : {LearnerSpec::Family::Ols, LearnerSpec::Family::Lasso,
                     LearnerSpec::Family::Boosting}) {
        LearnerSpec spec;
        spec.family = fam;
        Predictor f = fit_outcome_learner(spec, x, y);
        CHECK(f(std::vector<double>{9.0, 9.0, 9.0}) == doctest::Approx(4.5).epsilon(1e-12));
    }
}

TEST_CASE("propensity learners stay inside the clip band") {
    rng::Stream s(8, "prop-band");
    std::size_t n = 150;
    Matrix x = random_matrix(n, 3, s);
    std::vector<int> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = s.next_bernoulli(0.5) ? 1 : 0;
    for (auto fam : {LearnerSpec::Family::Ols, LearnerSpec::Family::Lasso,
                     LearnerSpec::Family::Boosting}) {
        LearnerSpec spec;
        spec.family = fam;
        Predictor f = fit_propensity_learner(spec, x, w, 0.05);
        for (std::size_t i = 0; i < n; ++i) {
            double p = f(x.row(i));
            CHECK(p >= 0.05);
            CHECK(p <= 0.95);
        }
    }
}

namespace {

TestDataset crossfit_fixture(std::size_t n, rng::Stream& s) {
    TestDataset data;
    data.x = random_matrix(n, 3, s);
    data.w.resize(n);
    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.w[i] = s.next_bernoulli(0.5) ? 1 : 0;
        data.y[i] = 2.0 * data.w[i];  // constant within each arm
    }
    // Force both arms non-empty.
    data.w[0] = 0;
    data.w[1] = 1;
    data.y[0] = 0.0;
    data.y[1] = 2.0;
    return data;
}

}  // namespace

TEST_CASE("cross_fit recovers constant arms and respects the clip band") {
    rng::Stream s(9, "cf-const");
    TestDataset data = crossfit_fixture(80, s);
    FoldAssignment folds = make_folds(data.n(), 2, 11);
    LearnerSpec ols;
    ols.family = LearnerSpec::Family::Ols;
    NuisanceFit nf = cross_fit(data, folds, ols, ols);
    REQUIRE(nf.mu0_hat.size() == data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        CHECK(nf.mu0_hat[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
        CHECK(nf.mu1_hat[i] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(nf.e_hat[i] >= nf.clip_eps);
        CHECK(nf.e_hat[i] <= 1.0 - nf.clip_eps);
    }
}

TEST_CASE("cross_fit is deterministic and leak-free") {
    rng::Stream s(10, "cf-leak");
    TestDataset data;
    data.x = random_matrix(60, 3, s);
    data.w.resize(60);
    data.y.resize(60);
    for (std::size_t i = 0; i < 60; ++i) {
        data.w[i] = i % 2 == 0 ? 1 : 0;
        data.y[i] = data.x(i, 0) + 0.5 * data.w[i] + 0.1 * s.next_normal();
    }
    FoldAssignment folds = make_folds(60, 3, 21);
    LearnerSpec ols;
    ols.family = LearnerSpec::Family::Ols;
    NuisanceFit a = cross_fit(data, folds, ols, ols);
    NuisanceFit b = cross_fit(data, folds, ols, ols);
    CHECK(a.mu0_hat == b.mu0_hat);
    CHECK(a.mu1_hat == b.mu1_hat);
    CHECK(a.e_hat == b.e_hat);

    // Perturbing outcomes inside fold 0 cannot change fold 0's predictions:
    // they come from models fitted on the other folds only.
    TestDataset tweaked = data;
    for (std::size_t i = 0; i < 60; ++i)
        if (folds.fold_of[i] == 0) tweaked.y[i] += 100.0;
    NuisanceFit t = cross_fit(tweaked, folds, ols, ols);
    bool other_fold_moved = false;
    for (std::size_t i = 0; i < 60; ++i) {
        if (folds.fold_of[i] == 0) {
            CHECK(t.mu0_hat[i] == a.mu0_hat[i]);
            CHECK(t.mu1_hat[i] == a.mu1_hat[i]);
        } else if (t.mu0_hat[i] != a.mu0_hat[i] || t.mu1_hat[i] != a.mu1_hat[i]) {
            other_fold_moved = true;
        }
    }
    CHECK(other_fold_moved);
}

TEST_CASE("cross_fit names the fold whose complement lacks an arm") {
    TestDataset data;
    data.x = Matrix(6, 2);
    for (std::size_t i = 0; i < 6; ++i) data.x(i, 0) = static_cast<double>(i);
    data.w = {0, 0, 0, 1, 1, 0};
    data.y = {0.0, 0.1, 0.2, 1.0, 1.1, 0.3};
    FoldAssignment folds;
    folds.k = 2;
    folds.fold_of = {0, 0, 0, 1, 1, 1};  // complement of fold 1 is all-control
    LearnerSpec ols;
    ols.family = LearnerSpec::Family::Ols;
    try {
        cross_fit(data, folds, ols, ols);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("fold") != std::string::npos);
    }
    CHECK_THROWS_AS(cross_fit(data, FoldAssignment{{0, 0, 0}, 2}, ols, ols), config_error);
}

TEST_CASE("learner spec names are stable identifiers") {
    LearnerSpec a;
    a.family = LearnerSpec::Family::Lasso;
    LearnerSpec b;
    b.family = LearnerSpec::Family::Boosting;
    LearnerSpec c;
    c.family = LearnerSpec::Family::Ols;
    CHECK(a.name() != b.name());
    CHECK(a.name() != c.name());
    CHECK(!a.name().empty());
}
