#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "catejudge/types.hpp"

namespace catejudge {

// Binary regression tree stored as a flat node array; node 0 is the root.
// Leaves have feature == -1 and carry the mean response of their region.
struct RegressionTree {
    struct Node {
        int feature = -1;        // split feature, -1 for leaf
        double threshold = 0.0;  // go left iff x[feature] <= threshold
        int left = -1, right = -1;
        double value = 0.0;      // leaf prediction
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
};

struct BoostParams {
    int max_depth = 2;
    int rounds = 50;
    double learning_rate = 0.3;
};

// Additive model: constant base plus learning_rate-scaled trees.
struct BoostModel {
    double base = 0.0;
    double learning_rate = 0.3;
    std::vector<RegressionTree> trees;

    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Matrix& x) const;
};

// Fits a single depth-limited least-squares tree to (x, r). Splits are
// exhaustive over midpoints between adjacent distinct feature values; a node
// splits only on strict SSE improvement. Tie-break: first improvement found
// scanning features in ascending index and thresholds in ascending value.
RegressionTree fit_tree(const Matrix& x, const std::vector<double>& r,
                        const std::vector<std::size_t>& idx, int max_depth);

// Gradient boosting for squared loss: base = mean(y), then `rounds` trees on
// residuals. Training MSE is non-increasing per round for learning_rate <= 1.
BoostModel fit_boosting(const Matrix& x, const std::vector<double>& y, const BoostParams& params);

}  // namespace catejudge
