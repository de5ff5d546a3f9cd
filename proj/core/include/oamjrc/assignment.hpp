#pragma once

#include <vector>

#include "oamjrc/linalg.hpp"

namespace oamjrc {

/// Minimum-cost assignment of rows to distinct columns (rows <= cols).
/// Returns col[row]. O(n^3) shortest augmenting path.
std::vector<int> hungarian(const RMatrix& cost);

}  // namespace oamjrc
