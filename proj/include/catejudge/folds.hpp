#pragma once

#include <cstddef>
#include <cstdint>

#include "catejudge/types.hpp"

namespace catejudge {

// Balanced random partition into k folds (sizes differ by at most 1),
// deterministic given seed. Requires 2 <= k <= n/2.
FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

}  // namespace catejudge
