#include "agentorg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "agentorg/errors.hpp"
#include "agentorg/evaluation.hpp"

namespace agentorg {

void InteractionGraph::add_edge(int a, int b) {
    if (a == b) throw precondition_error("interaction graph: self-loop on " + std::to_string(a));
    if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) {
        throw precondition_error("interaction graph: node out of range");
    }
    edges.emplace(std::min(a, b), std::max(a, b));
}

int InteractionGraph::degree(int node) const {
    int d = 0;
    for (const auto& [a, b] : edges) d += (a == node) + (b == node);
    return d;
}

InteractionGraph InteractionGraph::from_record(const RunRecord& record) {
    InteractionGraph g;
    g.n_nodes = record.n_agents;
    for (const auto& t : record.final_turns()) {
        for (int d : t.declared_dependencies) {
            if (d != t.agent_index && d >= 0 && d < g.n_nodes) g.add_edge(t.agent_index, d);
        }
    }
    return g;
}

void RoleLedger::add_run(const RunRecord& record) {
    for (const auto& t : record.final_turns()) {
        if (t.contributed() && t.role_name) {
            per_agent[t.agent_index].push_back(t.role_name);
            ++role_counts[*t.role_name];
        } else {
            per_agent[t.agent_index].push_back(std::nullopt);
        }
    }
}

RoleLedger RoleLedger::from_records(std::span<const RunRecord> records) {
    RoleLedger ledger;
    for (const auto& r : records) ledger.add_run(r);
    return ledger;
}

int RoleLedger::contributed_slots() const {
    int n = 0;
    for (const auto& [_, c] : role_counts) n += c;
    return n;
}

double role_stability_index(const RoleLedger& ledger) {
    double sum = 0.0;
    int agents = 0;
    for (const auto& [_, seq] : ledger.per_agent) {
        if (seq.size() < 2) continue;
        int same = 0;
        for (std::size_t i = 1; i < seq.size(); ++i) same += seq[i] == seq[i - 1];
        sum += static_cast<double>(same) / static_cast<double>(seq.size() - 1);
        ++agents;
    }
    if (agents == 0) throw undefined_metric("RSI needs at least two tasks per agent");
    return sum / agents;
}

HierarchyDepth hierarchy_depth_detail(const RunRecord& record) {
    std::set<int> nodes;
    const auto turns = record.final_turns();
    for (const auto& t : turns) {
        if (t.contributed()) nodes.insert(t.agent_index);
    }
    if (nodes.empty()) return {0, false};

    // Edge dependency -> dependent.
    std::vector<std::pair<int, int>> edges;
    for (const auto& t : turns) {
        if (!t.contributed()) continue;
        for (int d : t.declared_dependencies) {
            if (d != t.agent_index && nodes.count(d)) edges.emplace_back(d, t.agent_index);
        }
    }

    auto longest = [&](const std::vector<std::pair<int, int>>& es) -> std::optional<int> {
        std::map<int, std::vector<int>> out;
        std::map<int, int> indegree;
        for (int v : nodes) indegree[v] = 0;
        for (const auto& [a, b] : es) {
            out[a].push_back(b);
            ++indegree[b];
        }
        std::queue<int> ready;
        std::map<int, int> depth;
        for (const auto& [v, deg] : indegree) {
            if (deg == 0) ready.push(v);
            depth[v] = 1;
        }
        std::size_t seen = 0;
        int best = 1;
        while (!ready.empty()) {
            const int v = ready.front();
            ready.pop();
            ++seen;
            best = std::max(best, depth[v]);
            for (int w : out[v]) {
                depth[w] = std::max(depth[w], depth[v] + 1);
                if (--indegree[w] == 0) ready.push(w);
            }
        }
        if (seen != nodes.size()) return std::nullopt;
        return best;
    };

    if (auto d = longest(edges)) return {*d, false};
    std::erase_if(edges, [](const std::pair<int, int>& e) { return e.first > e.second; });
    return {*longest(edges), true};
}

int hierarchy_depth(const RunRecord& record) { return hierarchy_depth_detail(record).depth; }

double spectral_gap(const InteractionGraph& graph) {
    if (graph.n_nodes < 2) throw undefined_metric("spectral gap needs at least two nodes");
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(graph.n_nodes, graph.n_nodes);
    for (const auto& [a, b] : graph.edges) {
        laplacian(a, b) -= 1.0;
        laplacian(b, a) -= 1.0;
        laplacian(a, a) += 1.0;
        laplacian(b, b) += 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    // Rayleigh quotient of the computed eigenvector in extended precision: the error is
    // quadratic in the eigenvector error, which removes the last-bit noise of the solver.
    const Eigen::VectorXd x = solver.eigenvectors().col(1);  // ascending order
    long double num = 0.0L;
    long double den = 0.0L;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        long double lx = 0.0L;
        for (Eigen::Index j = 0; j < x.size(); ++j) lx += static_cast<long double>(laplacian(i, j)) * x(j);
        num += static_cast<long double>(x(i)) * lx;
        den += static_cast<long double>(x(i)) * x(i);
    }
    const double lambda2 = static_cast<double>(num / den);
    return lambda2 < 1e-12 ? 0.0 : lambda2;
}

double gini(std::span<const double> values) {
    std::vector<double> v;
    for (double x : values) {
        if (x > 0.0) v.push_back(x);
    }
    if (v.empty()) throw undefined_metric("Gini coefficient of an empty distribution");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    double weighted = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) weighted += static_cast<double>(i + 1) * v[i];
    const double g = 2.0 * weighted / (n * total) - (n + 1.0) / n;
    return std::max(0.0, g);
}

double role_gini(const RoleLedger& ledger) {
    std::vector<double> counts;
    for (const auto& [_, c] : ledger.role_counts) counts.push_back(static_cast<double>(c));
    return gini(counts);
}

ParticipationStats participation_stats(const RunRecord& record) {
    ParticipationStats s;
    for (const auto& t : record.final_turns()) {
        switch (t.participation) {
            case Participation::contributed: ++s.active; break;
            case Participation::voluntary_abstain: ++s.voluntary_abstain; break;
            case Participation::directed_idle: ++s.directed_idle; break;
            case Participation::failed: ++s.failed; break;
        }
    }
    s.abstention_rate = record.n_agents > 0 ? static_cast<double>(s.voluntary_abstain) / record.n_agents : 0.0;
    return s;
}

double coordination_overhead(const RunRecord& record) {
    if (record.total_tokens <= 0) return 0.0;
    std::int64_t coordination = record.coordinator_usage.total();
    if (record.protocol == Protocol::broadcast) {
        for (const auto& t : record.turns) {
            if (t.round == 1) coordination += t.token_usage.total();
        }
    }
    return static_cast<double>(coordination) / static_cast<double>(record.total_tokens);
}

RoleUniqueness role_uniqueness(const RoleLedger& ledger) {
    const int slots = ledger.contributed_slots();
    if (slots == 0) throw undefined_metric("role uniqueness of an empty ledger");
    int once = 0;
    for (const auto& [_, c] : ledger.role_counts) once += c == 1;
    const double distinct = static_cast<double>(ledger.role_counts.size());
    return {distinct / slots, once / distinct};
}

RunMetrics compute_run_metrics(const RunRecord& record) {
    RunMetrics m;
    if (record.judge) {
        m.quality = aggregate_quality(*record.judge);
        m.mission_relevance = mission_relevance(*record.judge);
    }
    m.hierarchy_depth = hierarchy_depth(record);
    if (record.n_agents >= 2) m.spectral_gap = spectral_gap(InteractionGraph::from_record(record));
    const auto p = participation_stats(record);
    m.active = p.active;
    m.voluntary_abstain = p.voluntary_abstain;
    m.directed_idle = p.directed_idle;
    m.failed = p.failed;
    m.abstention_rate = p.abstention_rate;
    m.coordination_overhead = coordination_overhead(record);
    return m;
}

}  // namespace agentorg
