#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "agentorg/core.hpp"
#include "agentorg/evaluation.hpp"

namespace agentorg {

struct ReportFiles {
    std::filesystem::path summary_csv;
    std::filesystem::path report_md;
    std::filesystem::path scaling_csv;
    std::filesystem::path protocols_csv;
};

inline constexpr double recovery_epsilon = 0.05;

// Reads <results_dir>/runs.jsonl (and the weights stored in manifest.json, if any) and writes
// summary.csv, report.md, scaling.csv and protocols.csv next to it. Output depends only on the
// log and manifest config, so re-running is byte-identical. Throws empty_series for an empty log.
ReportFiles generate_report(const std::filesystem::path& results_dir);

// The same, from records already in memory.
ReportFiles write_report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir,
                         const BalanceWeights& weights, const std::optional<ObjectiveWeights>& objective,
                         const std::string& title);

}  // namespace agentorg
