#pragma once

#include "otlab/measures.hpp"

namespace otlab {

/// Closed-form 1-D transport by increasing rearrangement: north-west-corner
/// pairing of the sorted cumulative weights. The support is monotone
/// (x < x' implies y <= y') and the plan is optimal for every cost
/// c = |x-y|^p with p >= 1. Cumulative ties advance the source side first.
/// Throws ValidationError unless both measures are 1-dimensional.
TransportPlan monotone_rearrangement(const DiscreteMeasure& mu,
                                     const DiscreteMeasure& nu);

}  // namespace otlab
