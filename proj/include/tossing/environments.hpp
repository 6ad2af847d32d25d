#pragma once

#include <cstdint>
#include <vector>

#include "tossing/domain.hpp"

namespace tossing {

/// Sorted list of the patterns of every empty slot; two workspaces with the
/// same signature are treated as the same environment.
std::vector<CPattern> pattern_signature(const Workspace& ws);

/// Draws `count` workspaces with random occupancy and random subsets of the
/// template's walls, rejecting duplicate signatures and any configuration
/// with an empty slot outside the twelve patterns. The first environments
/// are chosen so that every pattern appears among the empty slots.
/// Throws CoverageError when count < 12 or some pattern is unreachable.
std::vector<Workspace> generate_environments(const Workspace& ws_template, int count,
                                             std::uint64_t seed);

}  // namespace tossing
