#include "pathtune/config.hpp"

#include <fstream>
#include <sstream>

namespace pathtune {

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::ostringstream out;
    out << "invalid config:";
    for (const std::string& p : parts) {
        out << "\n  - " << p;
    }
    return out.str();
}

class Loader {
public:
    explicit Loader(const nlohmann::json& root) : root_(root) {}

    template <typename T>
    void get(const nlohmann::json& j, const char* path, const char* key, T& out) {
        if (!j.is_object() || !j.contains(key)) {
            return; // keep the default
        }
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(std::string(path) + key + ": wrong type");
        }
    }

    const nlohmann::json& section(const char* key) {
        static const nlohmann::json empty = nlohmann::json::object();
        if (root_.contains(key)) {
            if (root_.at(key).is_object()) {
                return root_.at(key);
            }
            fail(std::string(key) + ": must be an object");
        }
        return empty;
    }

    void get_range(const nlohmann::json& j, const char* key, double& lo, double& hi) {
        if (!j.is_object() || !j.contains(key)) {
            return;
        }
        const auto& entry = j.at(key);
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number()) {
            fail(std::string("domain.") + key + ": expected [lower, upper]");
            return;
        }
        lo = entry[0].get<double>();
        hi = entry[1].get<double>();
    }

    void fail(std::string message) { violations.push_back(std::move(message)); }

    std::vector<std::string> violations;

private:
    const nlohmann::json& root_;
};

void check_gain_bounds(Loader& loader, const char* name, double lo, double hi) {
    if (!(lo > 0.0) || !(lo < hi)) {
        loader.fail(std::string("domain.") + name + ": need 0 < lower < upper");
    }
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error(join(v)), violations(std::move(v)) {}

CampaignConfig config_from_json(const nlohmann::json& j) {
    Loader loader(j);
    CampaignConfig cfg;

    loader.get(j, "", "seed", cfg.campaign.seed);
    loader.get(j, "", "output_dir", cfg.output_dir);

    {
        const auto& t = loader.section("track");
        loader.get(t, "track.", "straight_length", cfg.track.straight_length);
        loader.get(t, "track.", "corner_radius", cfg.track.corner_radius);
        std::string direction = "counterclockwise";
        loader.get(t, "track.", "direction", direction);
        if (direction == "counterclockwise") {
            cfg.track.direction = TrackDirection::counterclockwise;
        } else if (direction == "clockwise") {
            cfg.track.direction = TrackDirection::clockwise;
        } else {
            loader.fail("track.direction: expected 'counterclockwise' or 'clockwise'");
        }
    }
    {
        const auto& s = loader.section("sim");
        loader.get(s, "sim.", "dt_control", cfg.sim.dt_control);
        loader.get(s, "sim.", "dt_log", cfg.sim.dt_log);
        loader.get(s, "sim.", "v_t", cfg.sim.v_t);
        loader.get(s, "sim.", "divergence_rho", cfg.sim.divergence_rho);
        loader.get(s, "sim.", "divergence_e_lat", cfg.sim.divergence_e_lat);
        loader.get(s, "sim.", "target_lookahead", cfg.sim.target_lookahead);
        loader.get(s, "sim.", "cost_warmup_s", cfg.sim.cost_warmup_s);
        if (s.contains("noise_du")) {
            loader.get(s.at("noise_du"), "sim.noise_du.", "v", cfg.sim.noise_du_v);
            loader.get(s.at("noise_du"), "sim.noise_du.", "omega", cfg.sim.noise_du_omega);
        }
        if (s.contains("noise_dy")) {
            loader.get(s.at("noise_dy"), "sim.noise_dy.", "x", cfg.sim.noise_dy_x);
            loader.get(s.at("noise_dy"), "sim.noise_dy.", "y", cfg.sim.noise_dy_y);
            loader.get(s.at("noise_dy"), "sim.noise_dy.", "phi", cfg.sim.noise_dy_phi);
        }
        if (s.contains("initial_offset")) {
            loader.get(s.at("initial_offset"), "sim.initial_offset.", "lateral",
                       cfg.sim.initial_offset.lateral);
            loader.get(s.at("initial_offset"), "sim.initial_offset.", "heading",
                       cfg.sim.initial_offset.heading);
        }
        if (s.contains("limits")) {
            loader.get(s.at("limits"), "sim.limits.", "v_max", cfg.sim.limits.v_max);
            loader.get(s.at("limits"), "sim.limits.", "omega_max", cfg.sim.limits.omega_max);
        }
    }
    {
        const auto& c = loader.section("cost");
        loader.get(c, "cost.", "w", cfg.cost_w);
        loader.get(c, "cost.", "lambda_pen", cfg.cost_lambda_pen);
    }
    {
        const auto& d = loader.section("domain");
        loader.get_range(d, "lambda_v", cfg.domain.lower.lambda_v, cfg.domain.upper.lambda_v);
        loader.get_range(d, "lambda_a", cfg.domain.lower.lambda_a, cfg.domain.upper.lambda_a);
        loader.get_range(d, "k1", cfg.domain.lower.k1, cfg.domain.upper.k1);
        loader.get_range(d, "k2", cfg.domain.lower.k2, cfg.domain.upper.k2);
    }
    {
        const auto& b = loader.section("baseline");
        loader.get(b, "baseline.", "lambda_v", cfg.baseline.lambda_v);
        loader.get(b, "baseline.", "lambda_a", cfg.baseline.lambda_a);
        loader.get(b, "baseline.", "k1", cfg.baseline.k1);
        loader.get(b, "baseline.", "k2", cfg.baseline.k2);
    }
    {
        const auto& b = loader.section("budget");
        loader.get(b, "budget.", "n_init", cfg.campaign.n_init);
        loader.get(b, "budget.", "n_max", cfg.campaign.n_max);
    }
    {
        const auto& s = loader.section("stopping");
        loader.get(s, "stopping.", "ei_tol", cfg.campaign.stopping.ei_tol);
        loader.get(s, "stopping.", "ei_patience", cfg.campaign.stopping.ei_patience);
        loader.get(s, "stopping.", "stall_window", cfg.campaign.stopping.stall_window);
        loader.get(s, "stopping.", "stall_rel_tol", cfg.campaign.stopping.stall_rel_tol);
    }

    // Cross-field validation; collect everything instead of stopping early.
    try {
        cfg.track.validate();
    } catch (const std::exception& e) {
        loader.fail(std::string("track: ") + e.what());
    }
    try {
        cfg.sim.validate();
    } catch (const std::exception& e) {
        loader.fail(std::string("sim: ") + e.what());
    }
    if (!(cfg.cost_w > 0.0)) loader.fail("cost.w: must be > 0");
    if (cfg.cost_lambda_pen < 0.0) loader.fail("cost.lambda_pen: must be >= 0");

    check_gain_bounds(loader, "lambda_v", cfg.domain.lower.lambda_v, cfg.domain.upper.lambda_v);
    check_gain_bounds(loader, "lambda_a", cfg.domain.lower.lambda_a, cfg.domain.upper.lambda_a);
    check_gain_bounds(loader, "k1", cfg.domain.lower.k1, cfg.domain.upper.k1);
    check_gain_bounds(loader, "k2", cfg.domain.lower.k2, cfg.domain.upper.k2);

    bool domain_ok = true;
    try {
        cfg.domain.validate();
    } catch (const std::exception&) {
        domain_ok = false; // already reported per gain above
    }
    try {
        cfg.baseline.validate();
        if (domain_ok && !cfg.domain.contains(cfg.baseline)) {
            loader.fail("baseline: outside the search domain");
        }
    } catch (const std::exception& e) {
        loader.fail(std::string("baseline: ") + e.what());
    }

    if (cfg.campaign.n_init < 1) loader.fail("budget.n_init: must be >= 1");
    if (cfg.campaign.n_max < cfg.campaign.n_init) {
        loader.fail("budget.n_max: must be >= n_init");
    }
    if (cfg.campaign.stopping.ei_tol < 0.0) loader.fail("stopping.ei_tol: must be >= 0");
    if (cfg.campaign.stopping.ei_patience < 1) loader.fail("stopping.ei_patience: must be >= 1");
    if (cfg.campaign.stopping.stall_window < 1) loader.fail("stopping.stall_window: must be >= 1");
    if (cfg.campaign.stopping.stall_rel_tol < 0.0) {
        loader.fail("stopping.stall_rel_tol: must be >= 0");
    }
    if (cfg.output_dir.empty()) loader.fail("output_dir: must not be empty");

    if (!loader.violations.empty()) {
        throw ConfigError(std::move(loader.violations));
    }
    return cfg;
}

CampaignConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open config file: " + path.string()});
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                  /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const CampaignConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.campaign.seed;
    j["output_dir"] = cfg.output_dir;
    j["track"] = {
        {"straight_length", cfg.track.straight_length},
        {"corner_radius", cfg.track.corner_radius},
        {"direction", cfg.track.direction == TrackDirection::clockwise ? "clockwise"
                                                                       : "counterclockwise"},
    };
    j["sim"] = {
        {"dt_control", cfg.sim.dt_control},
        {"dt_log", cfg.sim.dt_log},
        {"v_t", cfg.sim.v_t},
        {"noise_du", {{"v", cfg.sim.noise_du_v}, {"omega", cfg.sim.noise_du_omega}}},
        {"noise_dy",
         {{"x", cfg.sim.noise_dy_x}, {"y", cfg.sim.noise_dy_y}, {"phi", cfg.sim.noise_dy_phi}}},
        {"divergence_rho", cfg.sim.divergence_rho},
        {"divergence_e_lat", cfg.sim.divergence_e_lat},
        {"initial_offset",
         {{"lateral", cfg.sim.initial_offset.lateral},
          {"heading", cfg.sim.initial_offset.heading}}},
        {"target_lookahead", cfg.sim.target_lookahead},
        {"cost_warmup_s", cfg.sim.cost_warmup_s},
        {"limits", {{"v_max", cfg.sim.limits.v_max}, {"omega_max", cfg.sim.limits.omega_max}}},
    };
    j["cost"] = {{"w", cfg.cost_w}, {"lambda_pen", cfg.cost_lambda_pen}};
    j["domain"] = {
        {"lambda_v", {cfg.domain.lower.lambda_v, cfg.domain.upper.lambda_v}},
        {"lambda_a", {cfg.domain.lower.lambda_a, cfg.domain.upper.lambda_a}},
        {"k1", {cfg.domain.lower.k1, cfg.domain.upper.k1}},
        {"k2", {cfg.domain.lower.k2, cfg.domain.upper.k2}},
    };
    j["baseline"] = {
        {"lambda_v", cfg.baseline.lambda_v},
        {"lambda_a", cfg.baseline.lambda_a},
        {"k1", cfg.baseline.k1},
        {"k2", cfg.baseline.k2},
    };
    j["budget"] = {{"n_init", cfg.campaign.n_init}, {"n_max", cfg.campaign.n_max}};
    j["stopping"] = {
        {"ei_tol", cfg.campaign.stopping.ei_tol},
        {"ei_patience", cfg.campaign.stopping.ei_patience},
        {"stall_window", cfg.campaign.stopping.stall_window},
        {"stall_rel_tol", cfg.campaign.stopping.stall_rel_tol},
    };
    return j;
}

} // namespace pathtune
