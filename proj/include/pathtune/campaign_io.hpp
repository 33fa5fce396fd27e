#pragma once

#include "pathtune/bo.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace pathtune {

/// One campaign.jsonl line. Field order is part of the file contract:
/// i, source, theta, z, j_bo, j, j_lat, j_head, completion,
/// hyper{sigma_f2, ell, sigma_n2}, ei_at_selection, wall_time_s.
nlohmann::ordered_json iteration_to_json(const IterationRecord& it);

nlohmann::ordered_json summary_to_json(const CampaignRecord& record);

/// Writes content to <path> via a temp file in the same directory plus an
/// atomic rename, so a killed process never leaves a torn file at <path>.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Parses a .jsonl file into one json value per non-empty line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Exclusive marker file guarding an output directory against concurrent
/// writers. Created on construction (throws if it already exists), removed on
/// destruction.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path lock_path_;
};

} // namespace pathtune
