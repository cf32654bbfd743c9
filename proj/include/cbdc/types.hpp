#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cbdc {

// Minor currency units.
using Amount = std::int64_t;
// Logical simulator time.
using Tick = std::int64_t;

inline const std::vector<Amount> kDefaultDenominations = {1, 5, 10, 20, 50};

}  // namespace cbdc
