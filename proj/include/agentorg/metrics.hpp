#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agentorg/core.hpp"

namespace agentorg {

// Undirected agent graph; {i, j} is an edge iff one declared a dependency on the other.
struct InteractionGraph {
    int n_nodes = 0;
    std::set<std::pair<int, int>> edges;  // stored with first < second

    // Throws precondition_error on self-loops or out-of-range nodes.
    void add_edge(int a, int b);
    int degree(int node) const;

    static InteractionGraph from_record(const RunRecord& record);
};

// Per-agent role sequence across a campaign lineage, plus global usage counts.
struct RoleLedger {
    std::map<int, std::vector<std::optional<std::string>>> per_agent;  // nullopt: abstain / no contribution
    std::map<std::string, int> role_counts;

    void add_run(const RunRecord& record);
    static RoleLedger from_records(std::span<const RunRecord> records);
    int contributed_slots() const;
};

// Mean over agents of the share of consecutive task pairs with an identical role value.
// Agents with fewer than two entries are skipped; throws undefined_metric if none remain.
double role_stability_index(const RoleLedger& ledger);

struct HierarchyDepth {
    int depth = 1;
    bool cycle_removed = false;  // true when back-edges had to be dropped
};

// Longest dependency chain (in nodes) among contributing agents of the deciding round.
// 1 for a flat run, 0 if nobody contributed. On a cycle, dependencies pointing to a higher
// agent index are dropped and `cycle_removed` is set.
HierarchyDepth hierarchy_depth_detail(const RunRecord& record);
int hierarchy_depth(const RunRecord& record);

// Second-smallest eigenvalue of L = D - A. Throws undefined_metric when n_nodes < 2.
double spectral_gap(const InteractionGraph& graph);

// Gini coefficient of the non-zero role usage counts. Throws undefined_metric if empty.
double gini(std::span<const double> values);
double role_gini(const RoleLedger& ledger);

struct ParticipationStats {
    int active = 0;
    int voluntary_abstain = 0;
    int directed_idle = 0;
    int failed = 0;
    double abstention_rate = 0.0;
};

ParticipationStats participation_stats(const RunRecord& record);

// Coordinator planning tokens plus Broadcast round-1 tokens, over total_tokens (0 if no tokens).
double coordination_overhead(const RunRecord& record);

struct RoleUniqueness {
    double unique_fraction = 0.0;     // distinct names / contributed slots
    double used_once_fraction = 0.0;  // names used exactly once / distinct names
};

RoleUniqueness role_uniqueness(const RoleLedger& ledger);

// Everything that can be computed from one record (quality fields need judge scores).
RunMetrics compute_run_metrics(const RunRecord& record);

}  // namespace agentorg
