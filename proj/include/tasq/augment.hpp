#pragma once

#include <vector>

#include "tasq/pcc.hpp"
#include "tasq/workload.hpp"

namespace tasq {

// Synthesize (allocation, runtime) observations for one job from its
// observed skyline: the observed point plus simulated runs at 80% and 60%
// of the observed allocation; over-allocated jobs additionally get points
// at 120% and 140% of the skyline peak with the runtime floored at the
// peak-allocation runtime. Duplicate allocations are deduplicated; output
// is sorted by allocation.
std::vector<AllocationRuntime> augment(const Job& job);

// Target curve parameters for training: power-law fit over the augmented
// points.
PccParams fit_targets(const Job& job);

}  // namespace tasq
