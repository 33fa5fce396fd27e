#include "pathtune/cli_commands.hpp"

#include "pathtune/campaign_io.hpp"
#include "pathtune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace pathtune {

namespace {

CampaignConfig load_with_overrides(const GlobalOptions& options) {
    CampaignConfig cfg = load_config_file(options.config_path);
    if (options.seed) {
        cfg.campaign.seed = *options.seed;
    }
    if (options.output_dir) {
        cfg.output_dir = *options.output_dir;
    }
    return cfg;
}

std::string format_theta(const GainVector& g) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "[%.6g, %.6g, %.6g, %.6g]", g.lambda_v, g.lambda_a,
                  g.k1, g.k2);
    return buf;
}

std::filesystem::path lap_csv_path(const std::filesystem::path& dir, int index) {
    char name[32];
    std::snprintf(name, sizeof(name), "lap_%03d.csv", index);
    return dir / name;
}

std::string lap_csv_string(const LapLog& log) {
    std::ostringstream out;
    write_lap_csv(out, log);
    return out.str();
}

} // namespace

std::uint64_t lap_seed(std::uint64_t campaign_seed, int evaluation_index) {
    return mix_seed(campaign_seed, 0x1a9ULL + static_cast<std::uint64_t>(evaluation_index));
}

LapSummary summarize_lap(const LapResult& lap, double v_t) {
    LapSummary s;
    s.completed = lap.completed;
    s.completed_length = lap.completed_length;
    s.lap_len = lap.lap_len;
    s.diverged_at = lap.diverged_at;
    for (const LapSample& sample : lap.log.samples) {
        s.max_abs_e_lat = std::max(s.max_abs_e_lat, std::abs(sample.e_lat));
    }
    if (lap.diverged_at) {
        s.duration_s = *lap.diverged_at;
    } else if (v_t > 0.0) {
        s.duration_s = lap.completed_length / v_t;
    }
    return s;
}

CostBreakdown lap_cost(const LapResult& lap, double w, double lambda_pen) {
    if (lap.log.samples.size() >= 2) {
        return evaluate_cost(lap, w, lambda_pen);
    }
    // Ended before the recording window produced data: penalty only.
    CostBreakdown cost;
    cost.w = w;
    cost.lambda_pen = lambda_pen;
    cost.degenerate_lat = true;
    cost.degenerate_head = true;
    cost.completion_ratio =
        lap.lap_len > 0.0 ? std::clamp(lap.completed_length / lap.lap_len, 0.0, 1.0) : 0.0;
    cost.j_bo = lambda_pen * (1.0 - cost.completion_ratio);
    return cost;
}

Evaluator make_lap_evaluator(const CampaignConfig& cfg,
                             std::function<void(const LapResult&)> sink) {
    auto counter = std::make_shared<int>(0);
    return [cfg, sink, counter](const GainVector& gains) {
        ++*counter;
        SimConfig sim = cfg.sim;
        sim.seed = lap_seed(cfg.campaign.seed, *counter);
        LapResult lap = run_lap(cfg.track, gains, sim);

        EvalOutcome outcome;
        outcome.cost = lap_cost(lap, cfg.cost_w, cfg.cost_lambda_pen);
        outcome.j_bo = outcome.cost.j_bo;
        outcome.lap = summarize_lap(lap, cfg.sim.v_t);
        if (sink) {
            sink(lap);
        }
        return outcome;
    };
}

int cmd_tune(const GlobalOptions& options, bool write_all_laps) {
    CampaignConfig cfg;
    try {
        cfg = load_with_overrides(options);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    }

    const std::filesystem::path out_dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory: " << out_dir << '\n';
        return kExitRuntimeError;
    }

    try {
        DirectoryLock lock(out_dir);

        const std::filesystem::path jsonl_tmp = out_dir / "campaign.jsonl.tmp";
        std::ofstream jsonl(jsonl_tmp, std::ios::binary | std::ios::trunc);
        if (!jsonl) {
            std::cerr << "cannot open " << jsonl_tmp << '\n';
            return kExitRuntimeError;
        }

        std::optional<LapResult> last_lap;
        const Evaluator evaluate =
            make_lap_evaluator(cfg, [&last_lap](const LapResult& lap) { last_lap = lap; });

        double best_before = std::numeric_limits<double>::infinity();
        auto on_iteration = [&](const IterationRecord& it) {
            jsonl << iteration_to_json(it).dump() << '\n';
            jsonl.flush();

            const bool new_best = it.j_bo < best_before;
            best_before = std::min(best_before, it.j_bo);
            const bool interesting = write_all_laps || new_best ||
                                     it.source == IterationSource::baseline ||
                                     it.lap.diverged_at.has_value();
            if (interesting && last_lap) {
                write_text_atomic(lap_csv_path(out_dir, it.index), lap_csv_string(last_lap->log));
            }

            char line[256];
            std::snprintf(line, sizeof(line),
                          "i=%3d  source=%-13s  theta=%s  J_BO=%.3f  best=%.3f", it.index,
                          to_string(it.source), format_theta(it.theta).c_str(), it.j_bo,
                          best_before);
            std::cout << line << '\n';
            if (options.verbose && it.ei_at_selection) {
                std::snprintf(line, sizeof(line),
                              "      ei=%.4g  hyper: sigma_f2=%.4g ell=[%.3g, %.3g, %.3g, "
                              "%.3g] sigma_n2=%.4g",
                              *it.ei_at_selection, it.hyper.signal_variance,
                              it.hyper.length_scales[0], it.hyper.length_scales[1],
                              it.hyper.length_scales[2], it.hyper.length_scales[3],
                              it.hyper.noise_variance);
                std::cout << line << '\n';
            }
        };

        CampaignRecord record;
        try {
            record = run_campaign(cfg.domain, cfg.baseline, cfg.campaign, evaluate, on_iteration);
        } catch (const CampaignAborted& e) {
            jsonl.close();
            std::filesystem::rename(jsonl_tmp, out_dir / "campaign.jsonl");
            std::cerr << "campaign aborted: " << e.what() << '\n';
            return kExitRuntimeError;
        }

        jsonl.close();
        std::filesystem::rename(jsonl_tmp, out_dir / "campaign.jsonl");
        write_text_atomic(out_dir / "summary.json", summary_to_json(record).dump(2) + "\n");

        const IterationRecord& best = record.best();
        std::cout << "done: " << record.iterations.size() << " evaluations, stop_reason="
                  << record.stop_reason << ", best i=" << best.index
                  << " theta=" << format_theta(best.theta) << " J_BO=" << best.j_bo << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

int cmd_lap(const GlobalOptions& options, const std::array<double, 4>& gains) {
    CampaignConfig cfg;
    try {
        cfg = load_with_overrides(options);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    }

    const GainVector theta{gains[0], gains[1], gains[2], gains[3]};
    try {
        theta.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid gains: " << e.what() << '\n';
        return kExitConfigError;
    }
    if (!cfg.domain.contains(theta)) {
        std::cerr << "gains outside the search domain " << format_theta(cfg.domain.lower)
                  << " .. " << format_theta(cfg.domain.upper) << '\n';
        return kExitConfigError;
    }

    try {
        SimConfig sim = cfg.sim;
        sim.seed = cfg.campaign.seed;
        const LapResult lap = run_lap(cfg.track, theta, sim);
        const CostBreakdown cost = lap_cost(lap, cfg.cost_w, cfg.cost_lambda_pen);

        const std::filesystem::path out_dir(cfg.output_dir);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        const std::filesystem::path csv = out_dir / "lap.csv";
        write_text_atomic(csv, lap_csv_string(lap.log));

        std::cout << "theta=" << format_theta(theta) << '\n'
                  << "completed=" << (lap.completed ? "yes" : "no")
                  << "  L_comp=" << lap.completed_length << "  L_lap=" << lap.lap_len;
        if (lap.diverged_at) {
            std::cout << "  diverged_at=" << *lap.diverged_at << "s";
        }
        std::cout << '\n'
                  << "J_lat=" << cost.j_lat << "  J_head=" << cost.j_head << "  J=" << cost.j
                  << "  J_BO=" << cost.j_bo << "  completion=" << cost.completion_ratio << '\n';
        if (options.verbose && !lap.log.samples.empty()) {
            std::size_t saturated = 0, guarded = 0;
            double max_e_lat = 0.0;
            for (const LapSample& s : lap.log.samples) {
                saturated += s.cmd.v_saturated || s.cmd.omega_saturated;
                guarded += s.cmd.guard_active;
                max_e_lat = std::max(max_e_lat, std::abs(s.e_lat));
            }
            const double n = static_cast<double>(lap.log.samples.size());
            std::cout << "samples=" << lap.log.samples.size() << "  max|e_lat|=" << max_e_lat
                      << "  saturated=" << 100.0 * saturated / n
                      << "%  guard_active=" << 100.0 * guarded / n << "%\n";
        }
        std::cout << "lap csv: " << csv.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

namespace {

struct LapColumns {
    std::vector<double> t, x, y, phi, x_t, y_t, v_cmd, omega_cmd, rho, alpha, beta, e_lat,
        e_head;
};

bool read_lap_csv(const std::filesystem::path& path, LapColumns& out) {
    std::ifstream in(path);
    if (!in) {
        return false;
    }
    std::string header;
    if (!std::getline(in, header)) {
        return false;
    }
    std::map<std::string, int> index;
    {
        std::stringstream ss(header);
        std::string name;
        int i = 0;
        while (std::getline(ss, name, ',')) {
            index[name] = i++;
        }
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::strtod(cell.c_str(), nullptr));
        }
        auto col = [&](const char* name) { return row.at(static_cast<std::size_t>(index.at(name))); };
        out.t.push_back(col("t"));
        out.x.push_back(col("x"));
        out.y.push_back(col("y"));
        out.phi.push_back(col("phi"));
        out.x_t.push_back(col("x_t"));
        out.y_t.push_back(col("y_t"));
        out.v_cmd.push_back(col("v_cmd"));
        out.omega_cmd.push_back(col("omega_cmd"));
        out.rho.push_back(col("rho"));
        out.alpha.push_back(col("alpha"));
        out.beta.push_back(col("beta"));
        out.e_lat.push_back(col("e_lat"));
        out.e_head.push_back(col("e_head"));
    }
    return !out.t.empty();
}

struct Stats {
    double mean = 0.0, rms = 0.0, max = 0.0;
};

Stats abs_stats(const std::vector<double>& values) {
    Stats s;
    if (values.empty()) return s;
    double sum = 0.0, sum2 = 0.0;
    for (double v : values) {
        const double a = std::abs(v);
        sum += a;
        sum2 += a * a;
        s.max = std::max(s.max, a);
    }
    s.mean = sum / static_cast<double>(values.size());
    s.rms = std::sqrt(sum2 / static_cast<double>(values.size()));
    return s;
}

} // namespace

int cmd_report(const std::string& campaign_dir, std::vector<int> iterations) {
    const std::filesystem::path dir(campaign_dir);
    std::vector<nlohmann::json> lines;
    try {
        lines = read_jsonl(dir / "campaign.jsonl");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    if (lines.empty()) {
        std::cerr << "error: campaign.jsonl is empty\n";
        return kExitRuntimeError;
    }

    std::ostringstream cost_csv;
    cost_csv << "i,source,j_bo,j,j_lat,j_head,completion\n";
    std::ostringstream best_csv;
    best_csv << "i,best_j_bo\n";
    cost_csv.precision(12);
    best_csv.precision(12);

    double best = std::numeric_limits<double>::infinity();
    double best_warm = std::numeric_limits<double>::infinity();
    int best_index = 0, best_warm_index = 0;
    for (const nlohmann::json& line : lines) {
        const int i = line.at("i").get<int>();
        const double j_bo = line.at("j_bo").get<double>();
        const std::string source = line.at("source").get<std::string>();
        if (j_bo < best) {
            best = j_bo;
            best_index = i;
        }
        if (source != "acquisition" && j_bo < best_warm) {
            best_warm = j_bo;
            best_warm_index = i;
        }
        cost_csv << i << ',' << source << ',' << j_bo << ',' << line.at("j").get<double>()
                 << ',' << line.at("j_lat").get<double>() << ','
                 << line.at("j_head").get<double>() << ','
                 << line.at("completion").get<double>() << '\n';
        best_csv << i << ',' << best << '\n';
    }

    if (iterations.empty()) {
        std::set<int> picks{1, best_warm_index, best_index};
        iterations.assign(picks.begin(), picks.end());
    }

    std::ostringstream paths_csv, states_csv, stats_csv;
    paths_csv << "iter,t,x,y,x_t,y_t\n";
    states_csv << "iter,t,v_cmd,omega_cmd,phi,rho,alpha,beta,e_lat,e_head\n";
    stats_csv << "iter,lat_mean_m,lat_rms_m,lat_max_m,head_mean_deg,head_rms_deg,head_max_deg\n";
    paths_csv.precision(12);
    states_csv.precision(12);
    stats_csv.precision(6);

    for (int i : iterations) {
        LapColumns lap;
        if (!read_lap_csv(lap_csv_path(dir, i), lap)) {
            std::cerr << "note: no lap CSV for iteration " << i << ", skipping\n";
            continue;
        }
        for (std::size_t k = 0; k < lap.t.size(); ++k) {
            paths_csv << i << ',' << lap.t[k] << ',' << lap.x[k] << ',' << lap.y[k] << ','
                      << lap.x_t[k] << ',' << lap.y_t[k] << '\n';
            states_csv << i << ',' << lap.t[k] << ',' << lap.v_cmd[k] << ','
                       << lap.omega_cmd[k] << ',' << lap.phi[k] << ',' << lap.rho[k] << ','
                       << lap.alpha[k] << ',' << lap.beta[k] << ',' << lap.e_lat[k] << ','
                       << lap.e_head[k] << '\n';
        }
        const Stats lat = abs_stats(lap.e_lat);
        const Stats head = abs_stats(lap.e_head);
        constexpr double kDeg = 180.0 / 3.141592653589793238462643383279502884;
        stats_csv << i << ',' << lat.mean << ',' << lat.rms << ',' << lat.max << ','
                  << head.mean * kDeg << ',' << head.rms * kDeg << ',' << head.max * kDeg
                  << '\n';
    }

    try {
        write_text_atomic(dir / "cost_vs_iteration.csv", cost_csv.str());
        write_text_atomic(dir / "best_so_far.csv", best_csv.str());
        write_text_atomic(dir / "paths.csv", paths_csv.str());
        write_text_atomic(dir / "states.csv", states_csv.str());
        write_text_atomic(dir / "error_stats.csv", stats_csv.str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }

    std::cout << "report written to " << dir.string() << " (best i=" << best_index
              << ", best warm-start i=" << best_warm_index << ")\n";
    return kExitOk;
}

} // namespace pathtune
