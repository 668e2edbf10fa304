#include "agentorg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "agentorg/campaign.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/metrics.hpp"
#include "agentorg/objective.hpp"
#include "agentorg/shocks.hpp"
#include "agentorg/stats.hpp"

namespace agentorg {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

struct MeanSd {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size()));
    return m;
}

std::string csv_pair(const std::vector<double>& xs) {
    if (xs.empty()) return ",";
    const auto m = mean_sd(xs);
    return num(m.mean) + "," + num(m.sd);
}

std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Lineage coordinates recovered from a run id built by expand_grid.
struct RunCoordinates {
    std::string lineage;
    int task_index = 0;
};

std::optional<RunCoordinates> coordinates(const std::string& run_id) {
    static const std::regex pattern(R"(-(Coordinator|Sequential|Broadcast|Shared)-n(\d+)-s(\d+)-t(\d+)-)");
    std::smatch m;
    if (!std::regex_search(run_id, m, pattern)) return std::nullopt;
    return RunCoordinates{m[1].str() + "-n" + m[2].str() + "-s" + m[3].str(), std::stoi(m[4].str())};
}

template <typename Fn>
std::string guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return std::string("n/a (") + e.what() + ")";
    }
}

void comparison_block(std::ostream& md, const std::string& title, const std::vector<double>& a,
                      const std::vector<double>& b) {
    md << "### " << title << "\n\n";
    md << "| statistic | value |\n|---|---|\n";
    md << "| n | " << a.size() << " / " << b.size() << " |\n";
    md << "| mean Q | " << (a.empty() ? "n/a" : num(mean_sd(a).mean)) << " / "
       << (b.empty() ? "n/a" : num(mean_sd(b).mean)) << " |\n";
    const auto kw = [&] { return stats::kruskal_wallis({a, b}); };
    md << "| Kruskal-Wallis H | " << guarded([&] { return num(kw().H); }) << " |\n";
    md << "| Kruskal-Wallis p | " << guarded([&] { return num(kw().p); }) << " |\n";
    md << "| Cohen's d | " << guarded([&] { return num(stats::cohens_d(a, b)); }) << " |\n";
    md << "| rank-sum U | " << guarded([&] { return num(stats::rank_sum_test(a, b).U); }) << " |\n";
    md << "| rank-sum p | " << guarded([&] {
        const auto r = stats::rank_sum_test(a, b);
        return num(r.p) + (r.exact ? " (exact)" : " (normal approx.)");
    }) << " |\n";
    md << "| Welch t | " << guarded([&] { return num(stats::welch_t_test(a, b).t); }) << " |\n";
    md << "| Welch p | " << guarded([&] { return num(stats::welch_t_test(a, b).p); }) << " |\n\n";
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

ReportFiles write_report(const std::vector<RunRecord>& records, const fs::path& out_dir, const BalanceWeights& weights,
                         const std::optional<ObjectiveWeights>& objective, const std::string& title) {
    if (records.empty()) throw empty_series("empty run log: nothing to report");

    std::vector<RunRecord> valid;
    for (const auto& r : records) {
        if (!r.error) valid.push_back(r);
    }
    std::vector<RunRecord> judged;
    for (const auto& r : valid) {
        if (r.judge) judged.push_back(r);
    }
    std::optional<NormalizationSpec> norm;
    if (!valid.empty()) norm = NormalizationSpec::from_records(valid);

    auto quality = [](const RunRecord& r) { return aggregate_quality(*r.judge); };

    // ---- summary.csv
    using GroupKey = std::tuple<Protocol, int, Level, std::string>;
    std::map<GroupKey, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) groups[{r.protocol, r.n_agents, r.level, r.model_id}].push_back(&r);

    std::ostringstream summary;
    summary << "protocol,n_agents,level,model_id,runs,judged,failed,q_mean,q_sd,m_mean,m_sd,b_mean,b_sd,"
               "tokens_mean,tokens_sd,wall_time_mean,wall_time_sd,rsi,hd_mean,hd_sd,lambda2_mean,lambda2_sd,"
               "role_gini,abstention_mean,abstention_sd,overhead_mean,overhead_sd\n";
    for (const auto& [key, members] : groups) {
        const auto& [protocol, n, level, model] = key;
        std::vector<double> q, m, b, tokens, wall, hd, lambda2, abstention, overhead;
        std::map<std::uint64_t, std::vector<RunRecord>> by_seed;
        int failed = 0;
        for (const RunRecord* r : members) {
            if (r->error) {
                ++failed;
                continue;
            }
            if (r->judge) {
                q.push_back(quality(*r));
                m.push_back(mission_relevance(*r->judge));
                b.push_back(balance_index(*r, weights, *norm));
            }
            tokens.push_back(static_cast<double>(r->total_tokens));
            wall.push_back(r->wall_time_seconds);
            const auto metrics = r->metrics ? *r->metrics : compute_run_metrics(*r);
            hd.push_back(metrics.hierarchy_depth);
            if (metrics.spectral_gap) lambda2.push_back(*metrics.spectral_gap);
            abstention.push_back(metrics.abstention_rate);
            overhead.push_back(metrics.coordination_overhead);
            by_seed[r->seed].push_back(*r);
        }
        std::vector<double> rsi_values;
        RoleLedger pooled;
        for (const auto& [_, list] : by_seed) {
            const auto ledger = RoleLedger::from_records(list);
            for (const auto& r : list) pooled.add_run(r);
            try {
                rsi_values.push_back(role_stability_index(ledger));
            } catch (const undefined_metric&) {
            }
        }
        std::string gini_cell;
        try {
            gini_cell = num(role_gini(pooled));
        } catch (const undefined_metric&) {
        }
        summary << to_string(protocol) << ',' << n << ',' << to_string(level) << ',' << csv_field(model) << ','
                << members.size() << ',' << q.size() << ',' << failed << ',' << csv_pair(q) << ',' << csv_pair(m)
                << ',' << csv_pair(b) << ',' << csv_pair(tokens) << ',' << csv_pair(wall) << ','
                << (rsi_values.empty() ? std::string{} : num(mean_sd(rsi_values).mean)) << ',' << csv_pair(hd)
                << ',' << csv_pair(lambda2) << ',' << gini_cell << ',' << csv_pair(abstention) << ','
                << csv_pair(overhead) << '\n';
    }

    // ---- tidy CSVs
    std::map<std::pair<Protocol, int>, std::map<std::string, std::vector<double>>> scaling;
    std::map<Protocol, std::map<std::string, std::vector<double>>> bars;
    for (const auto& r : valid) {
        auto& s = scaling[{r.protocol, r.n_agents}];
        auto& p = bars[r.protocol];
        const auto add = [&](const std::string& metric, double v) {
            s[metric].push_back(v);
            p[metric].push_back(v);
        };
        if (r.judge) {
            add("q", quality(r));
            add("m", mission_relevance(*r.judge));
            add("b", balance_index(r, weights, *norm));
        }
        add("tokens", static_cast<double>(r.total_tokens));
        add("wall_time", r.wall_time_seconds);
        const auto metrics = r.metrics ? *r.metrics : compute_run_metrics(r);
        add("abstention", metrics.abstention_rate);
        add("overhead", metrics.coordination_overhead);
    }
    std::ostringstream scaling_csv;
    scaling_csv << "protocol,n_agents,metric,mean,sd,count\n";
    for (const auto& [key, metrics] : scaling) {
        for (const auto& [metric, xs] : metrics) {
            const auto ms = mean_sd(xs);
            scaling_csv << to_string(key.first) << ',' << key.second << ',' << metric << ',' << num(ms.mean) << ','
                        << num(ms.sd) << ',' << ms.n << '\n';
        }
    }
    std::ostringstream protocols_csv;
    protocols_csv << "protocol,metric,mean,sd,count\n";
    for (const auto& [protocol, metrics] : bars) {
        for (const auto& [metric, xs] : metrics) {
            const auto ms = mean_sd(xs);
            protocols_csv << to_string(protocol) << ',' << metric << ',' << num(ms.mean) << ',' << num(ms.sd) << ','
                          << ms.n << '\n';
        }
    }

    // ---- report.md
    std::map<Protocol, std::vector<double>> q_by_protocol;
    std::map<int, std::vector<double>> q_by_n;
    std::set<Protocol> protocols;
    std::set<int> team_sizes;
    for (const auto& r : records) {
        protocols.insert(r.protocol);
        team_sizes.insert(r.n_agents);
    }
    for (const auto& r : judged) {
        q_by_protocol[r.protocol].push_back(quality(r));
        q_by_n[r.n_agents].push_back(quality(r));
    }

    std::ostringstream md;
    md << "# Campaign report: " << title << "\n\n";
    md << "Records: " << records.size() << " (judged " << judged.size() << ", failed "
       << records.size() - valid.size() << ")\n\n";
    md << "Balance weights: Q " << num(weights.w_q) << ", M " << num(weights.w_m) << ", T " << num(weights.w_t)
       << ", C " << num(weights.w_c) << ", R " << num(weights.w_r) << "\n\n";

    md << "## Protocols\n\n";
    md << "| protocol | runs judged | mean Q | sd Q |";
    if (objective) md << " objective J |";
    md << "\n|---|---|---|---|" << (objective ? "---|" : "") << "\n";
    for (Protocol p : protocols) {
        const auto& xs = q_by_protocol[p];
        const auto ms = mean_sd(xs);
        md << "| " << to_string(p) << " | " << xs.size() << " | " << (xs.empty() ? "n/a" : num(ms.mean)) << " | "
           << (xs.empty() ? "n/a" : num(ms.sd)) << " |";
        if (objective) {
            std::vector<RunRecord> batch;
            for (const auto& r : judged) {
                if (r.protocol == p) batch.push_back(r);
            }
            md << ' ' << guarded([&] { return num(aggregate_objective(batch, *objective, *norm)); }) << " |";
        }
        md << '\n';
    }
    md << '\n';

    const std::vector<Protocol> protocol_list(protocols.begin(), protocols.end());
    const std::size_t protocol_pairs = protocol_list.size() * (protocol_list.size() - 1) / 2;
    md << "## Protocol comparisons (Q)\n\n";
    if (protocol_list.size() >= 2) {
        std::vector<std::vector<double>> all;
        for (Protocol p : protocol_list) all.push_back(q_by_protocol[p]);
        md << "Kruskal-Wallis across " << protocol_list.size() << " protocols: "
           << guarded([&] {
                  const auto kw = stats::kruskal_wallis(all);
                  return "H = " + num(kw.H) + ", p = " + num(kw.p);
              })
           << "\n\n";
        md << "Bonferroni alpha for " << protocol_pairs << " pairs: " << num(stats::bonferroni_alpha(0.05, static_cast<int>(protocol_pairs)))
           << "\n\n";
    } else {
        md << "Single protocol: no comparisons.\n\n";
    }
    for (std::size_t i = 0; i < protocol_list.size(); ++i) {
        for (std::size_t j = i + 1; j < protocol_list.size(); ++j) {
            comparison_block(md, std::string(to_string(protocol_list[i])) + " vs " + std::string(to_string(protocol_list[j])),
                             q_by_protocol[protocol_list[i]], q_by_protocol[protocol_list[j]]);
        }
    }

    const std::vector<int> n_list(team_sizes.begin(), team_sizes.end());
    md << "## Agent-count comparisons (Q)\n\n";
    if (n_list.size() >= 2) {
        std::vector<std::vector<double>> all;
        for (int n : n_list) all.push_back(q_by_n[n]);
        md << "Kruskal-Wallis across " << n_list.size() << " team sizes: "
           << guarded([&] {
                  const auto kw = stats::kruskal_wallis(all);
                  return "H = " + num(kw.H) + ", p = " + num(kw.p);
              })
           << "\n\n";
    } else {
        md << "Single team size: no comparisons.\n\n";
    }
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        for (std::size_t j = i + 1; j < n_list.size(); ++j) {
            comparison_block(md, "N=" + std::to_string(n_list[i]) + " vs N=" + std::to_string(n_list[j]),
                             q_by_n[n_list[i]], q_by_n[n_list[j]]);
        }
    }

    // Shock outcomes per lineage.
    std::map<std::string, std::map<int, const RunRecord*>> lineages;
    for (const auto& r : records) {
        if (auto c = coordinates(r.run_id)) lineages[c->lineage][c->task_index] = &r;
    }
    std::ostringstream shocks;
    for (const auto& [lineage, runs] : lineages) {
        std::vector<double> q;
        std::optional<int> shock_at;
        std::optional<ShockSpec> spec;
        bool complete = true;
        int expected = 0;
        for (const auto& [index, r] : runs) {
            if (index != expected++ || r->error || !r->judge) {
                complete = false;
                break;
            }
            if (r->shock_applied && !shock_at) {
                shock_at = index;
                spec = r->shock_applied;
            }
            q.push_back(quality(*r));
        }
        if (!shock_at) continue;
        shocks << "| " << lineage << " | " << to_string(spec->kind) << " | " << *shock_at << " | ";
        if (!complete) {
            shocks << "n/a | n/a |\n";
            continue;
        }
        const int window = std::min({default_resilience_window, *shock_at, static_cast<int>(q.size()) - *shock_at});
        shocks << guarded([&] { return num(resilience_index(q, *shock_at, window)); }) << " | "
               << guarded([&] {
                      const auto t = recovery_time(q, *shock_at, recovery_epsilon);
                      return t ? std::to_string(*t) : std::string("not recovered");
                  })
               << " |\n";
    }
    if (!shocks.str().empty()) {
        md << "## Shocks\n\n";
        md << "| lineage | shock | task index | resilience index | recovery time (eps " << num(recovery_epsilon)
           << ") |\n|---|---|---|---|---|\n"
           << shocks.str() << '\n';
    }

    fs::create_directories(out_dir);
    ReportFiles files{out_dir / "summary.csv", out_dir / "report.md", out_dir / "scaling.csv",
                      out_dir / "protocols.csv"};
    write_file(files.summary_csv, summary.str());
    write_file(files.report_md, md.str());
    write_file(files.scaling_csv, scaling_csv.str());
    write_file(files.protocols_csv, protocols_csv.str());
    return files;
}

ReportFiles generate_report(const fs::path& results_dir) {
    const auto log = results_dir / runs_log_name;
    if (!fs::exists(log)) throw std::runtime_error("no " + std::string(runs_log_name) + " in " + results_dir.string());
    const auto records = read_run_log(log);

    BalanceWeights weights;
    std::optional<ObjectiveWeights> objective;
    std::string title = results_dir.filename().string();
    std::ifstream in(results_dir / manifest_name);
    if (in) {
        const auto manifest = json::parse(in);
        title = manifest.value("campaign_id", title);
        if (manifest.contains("config")) {
            const auto& config = manifest.at("config");
            if (config.contains("balance_weights")) weights = config.at("balance_weights").get<BalanceWeights>();
            if (config.contains("objective_weights") && !config.at("objective_weights").is_null()) {
                objective = config.at("objective_weights").get<ObjectiveWeights>();
            }
        }
    }
    return write_report(records, results_dir, weights, objective, title);
}

}  // namespace agentorg
