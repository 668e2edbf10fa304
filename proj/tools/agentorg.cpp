#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "agentorg/campaign.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/report.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

int cmd_validate(const std::string& path) {
    const auto config = agentorg::load_campaign_config(path);
    const auto plans = agentorg::expand_grid(config);
    std::cout << "ok: " << config.campaign_id << ", " << plans.size() << " runs\n";
    return exit_ok;
}

int cmd_plan(const std::string& path, bool list) {
    const auto start = std::chrono::steady_clock::now();
    const auto config = agentorg::load_campaign_config(path);
    const auto plans = agentorg::expand_grid(config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (list) {
        for (const auto& p : plans) {
            std::cout << p.index << '\t' << p.run_id << '\t' << p.lineage;
            if (p.shock) std::cout << "\tshock=" << agentorg::to_string(p.shock->kind);
            std::cout << '\n';
        }
    }
    std::cout << "campaign " << config.campaign_id << ": " << config.protocols.size() << " protocols x "
              << config.agent_counts.size() << " team sizes x " << config.tasks.size() << " tasks x "
              << config.seeds.size() << " seeds = " << plans.size() << " runs";
    std::fprintf(stdout, " (enumerated in %.3f s)\n", secs);
    return exit_ok;
}

int cmd_run(const std::string& path, bool with_report, std::optional<std::size_t> stop_after) {
    const auto config = agentorg::load_campaign_config(path);
    agentorg::ExecuteOptions options;
    options.stop_after_runs = stop_after;
    const auto result = agentorg::execute_campaign(config, options);
    std::cout << "results: " << result.results_dir.string() << "\n"
              << "planned " << result.planned << ", executed " << result.executed << ", skipped "
              << result.skipped << ", failed " << result.failed << (result.interrupted ? " (interrupted)" : "")
              << '\n';
    if (with_report && !result.interrupted) {
        const auto files = agentorg::generate_report(result.results_dir);
        std::cout << "report: " << files.report_md.string() << '\n';
    }
    return exit_ok;
}

int cmd_report(const std::string& dir) {
    const auto files = agentorg::generate_report(dir);
    std::cout << files.summary_csv.string() << '\n'
              << files.report_md.string() << '\n'
              << files.scaling_csv.string() << '\n'
              << files.protocols_csv.string() << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agentorg: coordination-protocol campaigns for LLM agent teams"};
    app.require_subcommand(1);

    std::string config_path;
    std::string results_dir;
    bool list = false;
    bool no_report = false;
    std::optional<std::size_t> stop_after;

    auto* run = app.add_subcommand("run", "Execute a campaign (resumes an existing log)");
    run->add_option("config", config_path, "Campaign config (JSON)")->required();
    run->add_flag("--no-report", no_report, "Skip report generation after the run");
    run->add_option("--stop-after", stop_after, "Stop after writing this many new records");

    auto* plan = app.add_subcommand("plan", "Enumerate the run grid without executing it");
    plan->add_option("config", config_path, "Campaign config (JSON)")->required();
    plan->add_flag("--list", list, "Print every planned run");

    auto* report = app.add_subcommand("report", "Summarize a results directory");
    report->add_option("results_dir", results_dir, "Directory holding runs.jsonl")->required();

    auto* validate = app.add_subcommand("validate", "Check a campaign config");
    validate->add_option("config", config_path, "Campaign config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*run) return cmd_run(config_path, !no_report, stop_after);
        if (*plan) return cmd_plan(config_path, list);
        if (*report) return cmd_report(results_dir);
        if (*validate) return cmd_validate(config_path);
    } catch (const agentorg::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_runtime;
}
