#include "pathtune/campaign_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <stdexcept>
#include <system_error>

namespace pathtune {

nlohmann::ordered_json iteration_to_json(const IterationRecord& it) {
    nlohmann::ordered_json j;
    j["i"] = it.index;
    j["source"] = to_string(it.source);
    j["theta"] = {it.theta.lambda_v, it.theta.lambda_a, it.theta.k1, it.theta.k2};
    j["z"] = {it.z[0], it.z[1], it.z[2], it.z[3]};
    j["j_bo"] = it.j_bo;
    j["j"] = it.cost.j;
    j["j_lat"] = it.cost.j_lat;
    j["j_head"] = it.cost.j_head;
    j["completion"] = it.cost.completion_ratio;
    j["hyper"] = {
        {"sigma_f2", it.hyper.signal_variance},
        {"ell", {it.hyper.length_scales[0], it.hyper.length_scales[1],
                 it.hyper.length_scales[2], it.hyper.length_scales[3]}},
        {"sigma_n2", it.hyper.noise_variance},
    };
    if (it.ei_at_selection) {
        j["ei_at_selection"] = *it.ei_at_selection;
    } else {
        j["ei_at_selection"] = nullptr;
    }
    j["wall_time_s"] = it.lap.duration_s;
    return j;
}

nlohmann::ordered_json summary_to_json(const CampaignRecord& record) {
    nlohmann::ordered_json j;
    const IterationRecord& best = record.best();
    j["best"] = {
        {"i", best.index},
        {"theta", {best.theta.lambda_v, best.theta.lambda_a, best.theta.k1, best.theta.k2}},
        {"j_bo", best.j_bo},
    };
    j["stop_reason"] = record.stop_reason;
    j["n_evaluations"] = record.iterations.size();
    j["seed"] = record.seed;
    return j;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open for writing: " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("short write: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open: " + path.string());
    }
    std::vector<nlohmann::json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        lines.push_back(nlohmann::json::parse(line));
    }
    return lines;
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : lock_path_(dir / ".lock") {
    const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw std::runtime_error("output directory is locked by another run: " +
                                 lock_path_.string());
    }
    ::close(fd);
}

DirectoryLock::~DirectoryLock() {
    std::error_code ec;
    std::filesystem::remove(lock_path_, ec);
}

} // namespace pathtune
