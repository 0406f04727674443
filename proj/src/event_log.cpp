// SPDX-License-Identifier: Apache-2.0

#include "valuenet/event_log.hpp"

#include <stdexcept>

namespace valuenet {

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open event log: " + path_.string());
}

void EventLog::append(const nlohmann::json& record) {
    std::lock_guard lock(mu_);
    out_ << record.dump() << '\n';
    out_.flush();
}

std::vector<nlohmann::json> EventLog::read_all(const std::filesystem::path& path) {
    std::vector<nlohmann::json> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto record = nlohmann::json::parse(line, nullptr, false);
        if (!record.is_discarded()) out.push_back(std::move(record));
    }
    return out;
}

}  // namespace valuenet
