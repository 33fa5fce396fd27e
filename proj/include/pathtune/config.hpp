#pragma once

#include "pathtune/bo.hpp"
#include "pathtune/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathtune {

/// Everything a campaign needs, assembled from one config file.
struct CampaignConfig {
    TrackSpec track{};
    SimConfig sim{};
    double cost_w = 0.1;
    double cost_lambda_pen = 7000.0;
    SearchDomain domain = SearchDomain::defaults();
    GainVector baseline{};
    CampaignSettings campaign{};
    std::string output_dir = "runs/default";
};

/// Carries every violation found while loading a config, each prefixed with
/// the offending field path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> violations);
    std::vector<std::string> violations;
};

/// Parses and validates. The file may contain // and /* */ comments.
CampaignConfig load_config_file(const std::filesystem::path& path);

CampaignConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CampaignConfig& cfg);

} // namespace pathtune
