#include "pathtune/cli_commands.hpp"

#include <CLI11.hpp>

#include <array>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop gain tuning for a geometric path-following controller"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    pathtune::GlobalOptions options;
    std::uint64_t seed_override = 0;
    std::string output_dir_override;
    app.add_option("--config", options.config_path, "Campaign config file");
    auto* seed_opt = app.add_option("--seed", seed_override, "Override the campaign seed");
    auto* out_opt =
        app.add_option("--output-dir", output_dir_override, "Override the output directory");
    app.add_flag("--verbose", options.verbose, "Chattier progress output");

    CLI::App* tune = app.add_subcommand("tune", "Run a full tuning campaign");
    bool all_laps = false;
    tune->add_flag("--all", all_laps, "Write a CSV for every lap, not just interesting ones");

    CLI::App* lap = app.add_subcommand("lap", "Evaluate one gain vector for a single lap");
    std::vector<double> gains;
    lap->add_option("gains", gains, "lambda_v lambda_a k1 k2")->expected(4)->required();

    CLI::App* report = app.add_subcommand("report", "Export plot-ready CSVs from a campaign");
    std::string campaign_dir;
    report->add_option("campaign_dir", campaign_dir, "Directory with campaign.jsonl")
        ->required();
    std::vector<int> iterations;
    report->add_option("--iters", iterations, "Iterations to detail (default: notable ones)");

    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) {
        options.seed = seed_override;
    }
    if (*out_opt) {
        options.output_dir = output_dir_override;
    }

    if ((tune->parsed() || lap->parsed()) && options.config_path.empty()) {
        std::cerr << "error: --config is required for this command\n";
        return pathtune::kExitConfigError;
    }

    if (tune->parsed()) {
        return pathtune::cmd_tune(options, all_laps);
    }
    if (lap->parsed()) {
        return pathtune::cmd_lap(options, {gains[0], gains[1], gains[2], gains[3]});
    }
    if (report->parsed()) {
        return pathtune::cmd_report(campaign_dir, iterations);
    }
    return pathtune::kExitConfigError;
}
