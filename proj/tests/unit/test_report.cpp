#include <fstream>
#include <sstream>

#include "doctest.h"
#include "agentorg/campaign.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/metrics.hpp"
#include "agentorg/report.hpp"
#include "helpers.hpp"

using namespace agentorg;
using namespace testing_support;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_of(const std::string& text, const std::string& needle) {
    int n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

RunRecord judged_record(Protocol p, int n, std::uint64_t seed, int task, JudgeScores scores) {
    auto reg = mock_registry(make_policy(6, 0.5));
    auto setup = make_setup(n, seed, "r-" + std::string(to_string(p)) + "-" + std::to_string(seed) + "-" + std::to_string(task));
    setup.task = make_task("T-" + std::to_string(task));
    OrgMemory memory;
    auto r = run_protocol(p, setup, reg, memory);
    r.task_id = setup.task.task_id;
    r.judge = scores;
    r.metrics = compute_run_metrics(r);
    r.total_tokens = r.summed_tokens();
    return r;
}

std::vector<RunRecord> batch(const std::vector<Protocol>& protocols) {
    std::vector<RunRecord> out;
    for (auto p : protocols) {
        for (std::uint64_t s = 1; s <= 6; ++s) {
            const int a = 1 + static_cast<int>((s + static_cast<std::uint64_t>(p)) % 4);
            out.push_back(judged_record(p, 4, s, static_cast<int>(s), {a, 2, 3, 4, a}));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("single record has zero spread") {
    const auto dir = fresh_dir("report_one");
    const std::vector<RunRecord> one{judged_record(Protocol::sequential, 4, 1, 1, {4, 3, 2, 1, 3})};
    const auto files = write_report(one, dir, BalanceWeights{}, std::nullopt, "one");
    const auto csv = slurp(files.summary_csv);
    std::istringstream lines(csv);
    std::string header;
    std::string row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(row.rfind("Sequential,4,L1,mock,1,1,0,0.625000,0.000000,", 0) == 0);
    const auto md = slurp(files.report_md);
    CHECK(md.find("Single protocol: no comparisons.") != std::string::npos);
    CHECK(count_of(md, "### ") == 0);
}

TEST_CASE("pairwise blocks per protocol pair") {
    const auto two = write_report(batch({Protocol::sequential, Protocol::shared}), fresh_dir("report_two"),
                                  BalanceWeights{}, std::nullopt, "two");
    CHECK(count_of(slurp(two.report_md), "### ") == 1);
    CHECK(slurp(two.report_md).find("### Sequential vs Shared") != std::string::npos);

    const auto four = write_report(
        batch({Protocol::coordinator, Protocol::sequential, Protocol::broadcast, Protocol::shared}),
        fresh_dir("report_four"), BalanceWeights{}, ObjectiveWeights{1, 1, 0.1, 0.1, 0.1}, "four");
    const auto md = slurp(four.report_md);
    CHECK(count_of(md, "### ") == 6);
    CHECK(md.find("objective J") != std::string::npos);
    CHECK(md.find("Bonferroni alpha for 6 pairs") != std::string::npos);
}

TEST_CASE("report generation is byte-identical") {
    auto config = json{{"campaign_id", "rep"},
                       {"protocols", {"Sequential", "Broadcast"}},
                       {"agent_counts", {4, 6}},
                       {"task_corpus", {{"source", "bundled"}, {"limit", 8}}},
                       {"seeds", {1, 2, 3}},
                       {"backends", json::array({json{{"ref", "mock"}, {"kind", "mock"},
                                                      {"policy", {{"vocabulary_size", 8}}}}})},
                       {"agents", {{"backend", "mock"}}},
                       {"shock_schedule", json::array({json{{"kind", "remove_hub"}, {"at_task_index", 4}}})},
                       {"output_dir", fresh_dir("report_det").string()}};
    const auto c = parse_campaign_config(config);
    execute_campaign(c);
    const auto first = generate_report(c.output_dir);
    const std::string a = slurp(first.report_md) + slurp(first.summary_csv) + slurp(first.scaling_csv) +
                          slurp(first.protocols_csv);
    const auto second = generate_report(c.output_dir);
    const std::string b = slurp(second.report_md) + slurp(second.summary_csv) + slurp(second.scaling_csv) +
                          slurp(second.protocols_csv);
    CHECK(a == b);
    CHECK(slurp(first.report_md).find("## Shocks") != std::string::npos);
    CHECK(count_of(slurp(first.report_md), "### N=4 vs N=6") == 1);
}

TEST_CASE("empty log is an error") {
    const auto dir = fresh_dir("report_empty");
    std::ofstream(dir / runs_log_name).close();
    CHECK_THROWS_AS(generate_report(dir), empty_series);
    CHECK_THROWS_AS(write_report({}, dir, BalanceWeights{}, std::nullopt, "x"), empty_series);
}
