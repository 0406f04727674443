// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/serialization.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace valuenet::inbox {

struct InboxConfig {
    std::string base_url;                    // advertised base, e.g. http://127.0.0.1:3000
    std::vector<std::string> inbox_paths;    // each path is one inbox, e.g. "/inbox"
    std::filesystem::path storage_dir;
    std::size_t max_body_bytes = 1 << 20;
    // artifact path prefix -> inbox path, drives the ldp#inbox Link header
    std::map<std::string, std::string> artifact_inboxes;
    std::vector<std::string> sender_allowlist;  // remote addresses; empty = open
    bool enforce_profile = true;  // false accepts any well-formed RDF (plain-LDN interop)
};

struct StoredNotification {
    std::string id;            // notification id from the payload
    std::string resource_url;  // where GET returns the stored bytes
    std::string received_at;
    std::optional<std::string> sender_hint;
    wire::WireDocument document;
};

/// LDN receiver: POST to an inbox stores the notification, GET lists the
/// inbox, GET on a notification resource returns the original bytes, and
/// GET/HEAD on mapped artifact paths advertises the inbox Link relation.
/// Inboxes can be added at runtime (multi-tenant "/{host}/inbox" layout).
class InboxServer {
public:
    explicit InboxServer(InboxConfig config);
    ~InboxServer();

    InboxServer(const InboxServer&) = delete;
    InboxServer& operator=(const InboxServer&) = delete;

    /// Bind and serve on a background thread. Port 0 picks a free port and
    /// rewrites base_url accordingly. Throws on bind failure.
    void start(const std::string& bind_address = "127.0.0.1", int port = 0);
    void stop();
    int port() const { return port_; }
    const std::string& base_url() const { return config_.base_url; }

    void create_inbox(const std::string& inbox_path);
    void map_artifact(const std::string& path_prefix, const std::string& inbox_path);
    std::vector<std::string> inbox_paths() const;

    /// Stored notifications of one inbox, in receipt order.
    std::vector<StoredNotification> stored(const std::string& inbox_path) const;
    std::size_t stored_count(const std::string& inbox_path) const;

    std::string inbox_url(const std::string& inbox_path) const;

private:
    struct Store;

    InboxConfig config_;
    int port_ = 0;
    std::unique_ptr<httplib::Server> server_;
    std::unique_ptr<std::thread> serve_thread_;
    std::unique_ptr<Store> store_;

    void install_handlers();
};

/// Storage view used by post-hoc verification: reads an inbox directory's
/// index without a live server.
std::vector<StoredNotification> read_inbox_storage(const std::filesystem::path& storage_dir,
                                                   const std::string& inbox_path);

}  // namespace valuenet::inbox
