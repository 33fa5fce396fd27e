#pragma once

#include "pathtune/config.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathtune {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;       // overrides config seed
    std::optional<std::string> output_dir;   // overrides config output_dir
    bool verbose = false;
};

/// Run a full campaign: writes campaign.jsonl, summary.json and lap CSVs for
/// the interesting iterations (baseline, new best, divergences; all of them
/// with write_all_laps). Prints one line per iteration.
int cmd_tune(const GlobalOptions& options, bool write_all_laps);

/// Evaluate a single gain vector: one lap, one CSV, cost breakdown on stdout.
int cmd_lap(const GlobalOptions& options, const std::array<double, 4>& gains);

/// Post-process a campaign directory into plot-ready CSV files. `iterations`
/// selects the laps detailed in paths/states/error_stats; empty selects the
/// baseline, the best warm-start point and the best overall.
int cmd_report(const std::string& campaign_dir, std::vector<int> iterations);

/// Per-lap simulation seed, derived from the campaign seed and the 1-based
/// evaluation index so that paired campaigns see identical noise.
std::uint64_t lap_seed(std::uint64_t campaign_seed, int evaluation_index);

/// Builds the closed-loop evaluator used by campaigns; `sink`, when non-null,
/// receives each finished lap (for CSV export).
Evaluator make_lap_evaluator(const CampaignConfig& cfg,
                             std::function<void(const LapResult&)> sink = {});

/// evaluate_cost, except that a lap which ended before the recording window
/// produced two samples is scored by its penalty term alone.
CostBreakdown lap_cost(const LapResult& lap, double w, double lambda_pen);

LapSummary summarize_lap(const LapResult& lap, double v_t);

} // namespace pathtune
