#include "catejudge/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace catejudge {

double RegressionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const Node& nd = nodes[node];
        node = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return nodes[node].value;
}

double BoostModel::predict(std::span<const double> x) const {
    double out = base;
    for (const RegressionTree& t : trees) out += learning_rate * t.predict(x);
    return out;
}

std::vector<double> BoostModel::predict_all(const Matrix& x) const {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
    return out;
}

namespace {

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;  // combined child SSE
};

// Exhaustive scan. SSE(S) = sum y^2 - (sum y)^2 / |S| per child, combined and
// compared against the parent; strict improvement required. Scanning order
// (feature asc, threshold asc) with strict `<` makes the tie-break explicit.
BestSplit best_split(const Matrix& x, const std::vector<double>& r,
                     const std::vector<std::size_t>& idx) {
    const std::size_t m = idx.size();
    BestSplit best;
    long double tot = 0.0L, tot2 = 0.0L;
    for (std::size_t i : idx) {
        tot += r[i];
        tot2 += static_cast<long double>(r[i]) * r[i];
    }
    const double parent_sse = static_cast<double>(tot2 - tot * tot / m);
    best.sse = parent_sse;

    std::vector<std::pair<double, double>> col(m);  // (feature value, response)
    for (std::size_t j = 0; j < x.cols; ++j) {
        for (std::size_t t = 0; t < m; ++t) col[t] = {x(idx[t], j), r[idx[t]]};
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        long double lsum = 0.0L, lsum2 = 0.0L;
        for (std::size_t t = 0; t + 1 < m; ++t) {
            lsum += col[t].second;
            lsum2 += static_cast<long double>(col[t].second) * col[t].second;
            if (col[t].first == col[t + 1].first) continue;  // no boundary here
            const std::size_t nl = t + 1, nr = m - nl;
            const long double rsum = tot - lsum, rsum2 = tot2 - lsum2;
            const double sse = static_cast<double>((lsum2 - lsum * lsum / nl) +
                                                   (rsum2 - rsum * rsum / nr));
            if (sse < (best.found ? best.sse : parent_sse) &&
                sse < parent_sse - 1e-12 * std::max(1.0, parent_sse)) {
                best.found = true;
                best.feature = static_cast<int>(j);
                best.threshold = col[t].first + 0.5 * (col[t + 1].first - col[t].first);
                best.sse = sse;
            }
        }
    }
    return best;
}

int build(const Matrix& x, const std::vector<double>& r, std::vector<std::size_t> idx,
          int depth_left, RegressionTree& tree) {
    long double sum = 0.0L;
    for (std::size_t i : idx) sum += r[i];
    const int me = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[me].value = static_cast<double>(sum / idx.size());
    if (depth_left <= 0 || idx.size() < 2) return me;

    BestSplit sp = best_split(x, r, idx);
    if (!sp.found) return me;

    std::vector<std::size_t> li, ri;
    for (std::size_t i : idx) (x(i, sp.feature) <= sp.threshold ? li : ri).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    tree.nodes[me].feature = sp.feature;
    tree.nodes[me].threshold = sp.threshold;
    const int l = build(x, r, std::move(li), depth_left - 1, tree);
    tree.nodes[me].left = l;
    const int rr = build(x, r, std::move(ri), depth_left - 1, tree);
    tree.nodes[me].right = rr;
    return me;
}

}  // namespace

RegressionTree fit_tree(const Matrix& x, const std::vector<double>& r,
                        const std::vector<std::size_t>& idx, int max_depth) {
    if (idx.empty()) throw config_error("fit_tree: empty index set");
    if (max_depth < 0) throw config_error("fit_tree: max_depth must be >= 0");
    RegressionTree tree;
    build(x, r, idx, max_depth, tree);
    return tree;
}

BoostModel fit_boosting(const Matrix& x, const std::vector<double>& y, const BoostParams& params) {
    if (x.rows != y.size())
        throw std::domain_error("fit_boosting: x has " + std::to_string(x.rows) +
                                " rows but y has " + std::to_string(y.size()));
    if (x.rows == 0) throw std::domain_error("fit_boosting: empty training set");
    if (params.rounds < 0) throw config_error("fit_boosting: rounds must be >= 0");
    if (params.max_depth < 1) throw config_error("fit_boosting: max_depth must be >= 1");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        throw config_error("fit_boosting: learning_rate must be in (0, 1]");

    BoostModel model;
    model.learning_rate = params.learning_rate;
    long double ym = 0.0L;
    for (double v : y) ym += v;
    model.base = static_cast<double>(ym / y.size());

    std::vector<double> resid(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - model.base;
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    for (int round = 0; round < params.rounds; ++round) {
        RegressionTree t = fit_tree(x, resid, all, params.max_depth);
        for (std::size_t i = 0; i < y.size(); ++i)
            resid[i] -= params.learning_rate * t.predict(x.row(i));
        model.trees.push_back(std::move(t));
    }
    return model;
}

}  // namespace catejudge
