#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace catejudge {

// Bad configuration or malformed input. The CLI maps this to exit code 2.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Row-major dense matrix. Small-d regression work only; no BLAS behind it.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data.data() + i * cols, cols);
    }
};

// Held-out test data: covariates X, binary treatment W, observed outcome Y.
struct TestDataset {
    Matrix x;
    std::vector<int> w;
    std::vector<double> y;

    std::size_t n() const { return x.rows; }
    std::size_t d() const { return x.cols; }

    // Throws config_error on non-finite entries, w outside {0,1}, or an empty arm.
    void validate() const;
};

// One candidate HTE estimator materialized as a prediction per test unit.
struct HtePredictions {
    std::vector<double> values;
    std::string label;
};

struct FoldAssignment {
    std::vector<int> fold_of;  // in [0, k)
    int k = 0;
};

// Cross-fitted nuisance predictions; entry i comes from models fitted without
// unit i's fold. e_hat is kept inside [clip_eps, 1 - clip_eps].
struct NuisanceFit {
    std::vector<double> mu0_hat;
    std::vector<double> mu1_hat;
    std::vector<double> e_hat;
    double clip_eps = 0.01;
};

// Per-unit summands psi_i^+ whose average is the point estimate.
struct InfluenceValues {
    std::vector<double> psi_plus;
};

struct ErrorEstimate {
    double point = 0.0;
    double var_hat = 0.0;  // empirical variance of psi_plus, divide-by-n
    double se = 0.0;       // sqrt(var_hat / n)
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double alpha = 0.0;
    std::size_t n = 0;

    double width() const { return ci_hi - ci_lo; }
};

enum class Decision { SelectFirst, SelectSecond, Inconclusive };
enum class VerdictBasis { AbsoluteDisjoint, RelativeSign };

struct ComparisonVerdict {
    Decision decision = Decision::Inconclusive;
    VerdictBasis basis = VerdictBasis::RelativeSign;
    double confidence_level = 0.0;
};

const char* to_string(Decision d);
const char* to_string(VerdictBasis b);

}  // namespace catejudge
