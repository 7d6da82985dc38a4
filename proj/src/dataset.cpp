#include <cmath>
#include <string>

#include "catejudge/types.hpp"

namespace catejudge {

void TestDataset::validate() const {
    const std::size_t nn = n();
    if (nn < 2) throw config_error("dataset: need at least 2 units");
    if (d() < 1) throw config_error("dataset: need at least 1 covariate");
    if (w.size() != nn || y.size() != nn) {
        throw config_error("dataset: treatment/outcome length does not match covariate rows");
    }
    std::size_t treated = 0;
    for (std::size_t i = 0; i < nn; ++i) {
        if (w[i] != 0 && w[i] != 1) {
            throw config_error("dataset: treatment must be 0 or 1 (unit " + std::to_string(i) + ")");
        }
        treated += static_cast<std::size_t>(w[i]);
        if (!std::isfinite(y[i])) {
            throw config_error("dataset: non-finite outcome (unit " + std::to_string(i) + ")");
        }
        for (std::size_t j = 0; j < d(); ++j) {
            if (!std::isfinite(x(i, j))) {
                throw config_error("dataset: non-finite covariate (unit " + std::to_string(i) +
                                   ", feature " + std::to_string(j) + ")");
            }
        }
    }
    if (treated == 0 || treated == nn) {
        throw config_error("dataset: both treatment arms must be non-empty");
    }
}

}  // namespace catejudge
