// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>

namespace valuenet {

/// Append-only newline-delimited JSON log. One record per line, flushed on
/// every append so the file doubles as a crash-recovery journal.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);

    void append(const nlohmann::json& record);
    const std::filesystem::path& path() const { return path_; }

    static std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mu_;
};

}  // namespace valuenet
