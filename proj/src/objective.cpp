#include "agentorg/objective.hpp"

#include "agentorg/errors.hpp"

namespace agentorg {

double aggregate_objective(std::span<const RunRecord> records, const ObjectiveWeights& w,
                           const NormalizationSpec& norm) {
    if (records.empty()) throw empty_series();
    w.validate();
    double sum = 0.0;
    for (const auto& r : records) {
        if (!r.judge) throw unjudged_record(r.run_id);
        sum += w.alpha_q * aggregate_quality(*r.judge) + w.alpha_m * mission_relevance(*r.judge) -
               w.alpha_t * norm.time.normalize(r.wall_time_seconds) -
               w.alpha_c * norm.cost.normalize(static_cast<double>(r.total_tokens)) -
               w.alpha_r * norm.risk.normalize(static_cast<double>(r.risk_events));
    }
    return sum / static_cast<double>(records.size());
}

}  // namespace agentorg
