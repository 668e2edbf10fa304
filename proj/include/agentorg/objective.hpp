#pragma once

#include <span>

#include "agentorg/core.hpp"
#include "agentorg/evaluation.hpp"

namespace agentorg {

// Empirical objective over a batch: mean of
//   a_Q*Q + a_M*M - a_T*T^ - a_C*C^ - a_R*R^
// with T^, C^, R^ min-max normalized by `normalizer`.
// Throws empty_series for no records and unjudged_record naming the first unjudged run.
double aggregate_objective(std::span<const RunRecord> records, const ObjectiveWeights& weights,
                           const NormalizationSpec& normalizer);

}  // namespace agentorg
