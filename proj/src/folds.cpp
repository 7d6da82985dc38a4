#include "catejudge/folds.hpp"

#include <string>

#include "catejudge/rng.hpp"

namespace catejudge {

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) * 2 > n) {
        throw config_error("make_folds: fold count " + std::to_string(k) +
                           " out of range [2, n/2] for n=" + std::to_string(n));
    }
    FoldAssignment fa;
    fa.k = k;
    fa.fold_of.resize(n);
    // Labels 0,1,...,k-1,0,1,... are balanced by construction; shuffling the
    // label vector randomizes which units land in which fold.
    for (std::size_t i = 0; i < n; ++i) {
        fa.fold_of[i] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    rng::Stream stream(seed, "folds");
    stream.shuffle(fa.fold_of);
    return fa;
}

}  // namespace catejudge
