// SPDX-License-Identifier: Apache-2.0

#include "valuenet/inbox_server.hpp"

#include "valuenet/clock.hpp"
#include "valuenet/uuid.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <shared_mutex>

namespace valuenet::inbox {

using nlohmann::json;

namespace {

constexpr std::string_view ldp_inbox_rel = "http://www.w3.org/ns/ldp#inbox";

std::string encode_inbox_dir(const std::string& inbox_path) {
    std::string out;
    std::string_view p = inbox_path;
    while (!p.empty() && p.front() == '/') p.remove_prefix(1);
    for (char c : p) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ||
            c == ':') {
            out += c;
        } else if (c == '/') {
            out += "__";
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        }
    }
    return out.empty() ? "_root" : out;
}

std::string body_extension(const std::string& media_type) {
    return media_type.rfind("text/turtle", 0) == 0 ? ".ttl" : ".jsonld";
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomically(const std::filesystem::path& p, const std::string& bytes) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

std::vector<StoredNotification> load_index(const std::filesystem::path& dir) {
    std::vector<StoredNotification> out;
    std::ifstream in(dir / "index.ndjson");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) continue;
        StoredNotification item;
        item.id = record.value("id", "");
        item.resource_url = record.value("resource", "");
        item.received_at = record.value("received_at", "");
        if (record.contains("sender") && record["sender"].is_string()) {
            item.sender_hint = record["sender"].get<std::string>();
        }
        item.document.media_type = record.value("media_type", "");
        auto file = dir / record.value("file", "");
        if (!std::filesystem::exists(file)) continue;  // torn write: index wins
        item.document.body = read_file(file);
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace

std::vector<StoredNotification> read_inbox_storage(const std::filesystem::path& storage_dir,
                                                   const std::string& inbox_path) {
    return load_index(storage_dir / encode_inbox_dir(inbox_path));
}

// ---------------------------------------------------------------------------

struct InboxServer::Store {
    struct Inbox {
        std::filesystem::path dir;
        std::vector<StoredNotification> items;            // receipt order
        std::map<std::string, std::size_t> by_id;         // notification id -> index
        std::map<std::string, std::size_t> by_resource;   // resource tail -> index
        std::unique_ptr<std::mutex> mu = std::make_unique<std::mutex>();
    };

    mutable std::shared_mutex mu;
    std::map<std::string, Inbox> inboxes;                  // keyed by inbox path
    std::map<std::string, std::string> artifact_inboxes;   // path prefix -> inbox path
};

InboxServer::InboxServer(InboxConfig config)
    : config_(std::move(config)), store_(std::make_unique<Store>()) {
    std::filesystem::create_directories(config_.storage_dir);
    server_ = std::make_unique<httplib::Server>();
    server_->set_payload_max_length(config_.max_body_bytes);
    install_handlers();
    store_->artifact_inboxes = config_.artifact_inboxes;
    for (const auto& path : config_.inbox_paths) create_inbox(path);
}

InboxServer::~InboxServer() { stop(); }

void InboxServer::create_inbox(const std::string& inbox_path) {
    std::unique_lock lock(store_->mu);
    if (store_->inboxes.count(inbox_path)) return;
    Store::Inbox inbox;
    inbox.dir = config_.storage_dir / encode_inbox_dir(inbox_path);
    std::filesystem::create_directories(inbox.dir);
    inbox.items = load_index(inbox.dir);  // crash recovery: replay the index
    for (std::size_t i = 0; i < inbox.items.size(); ++i) {
        inbox.by_id[inbox.items[i].id] = i;
        auto tail = inbox.items[i].resource_url.substr(
            inbox.items[i].resource_url.find_last_of('/') + 1);
        inbox.by_resource[tail] = i;
    }
    store_->inboxes.emplace(inbox_path, std::move(inbox));
}

void InboxServer::map_artifact(const std::string& path_prefix, const std::string& inbox_path) {
    std::unique_lock lock(store_->mu);
    store_->artifact_inboxes[path_prefix] = inbox_path;
}

std::vector<std::string> InboxServer::inbox_paths() const {
    std::shared_lock lock(store_->mu);
    std::vector<std::string> out;
    out.reserve(store_->inboxes.size());
    for (const auto& [path, _] : store_->inboxes) out.push_back(path);
    return out;
}

std::vector<StoredNotification> InboxServer::stored(const std::string& inbox_path) const {
    std::shared_lock lock(store_->mu);
    auto it = store_->inboxes.find(inbox_path);
    if (it == store_->inboxes.end()) return {};
    std::lock_guard inbox_lock(*it->second.mu);
    return it->second.items;
}

std::size_t InboxServer::stored_count(const std::string& inbox_path) const {
    std::shared_lock lock(store_->mu);
    auto it = store_->inboxes.find(inbox_path);
    if (it == store_->inboxes.end()) return 0;
    std::lock_guard inbox_lock(*it->second.mu);
    return it->second.items.size();
}

std::string InboxServer::inbox_url(const std::string& inbox_path) const {
    return config_.base_url + inbox_path;
}

void InboxServer::start(const std::string& bind_address, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(bind_address);
        if (port_ <= 0) throw std::runtime_error("cannot bind inbox server");
    } else {
        if (!server_->bind_to_port(bind_address, port)) {
            throw std::runtime_error("cannot bind inbox server to port " + std::to_string(port));
        }
        port_ = port;
    }
    if (config_.base_url.empty() || port == 0) {
        config_.base_url = "http://" + bind_address + ":" + std::to_string(port_);
    }
    serve_thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void InboxServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (serve_thread_ && serve_thread_->joinable()) serve_thread_->join();
    serve_thread_.reset();
}

// ---------------------------------------------------------------------------
// request handling
// ---------------------------------------------------------------------------

namespace {

void plain(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(message + "\n", "text/plain");
}

}  // namespace

void InboxServer::install_handlers() {
    // receive
    server_->Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string& inbox_path = req.path;
        {
            std::shared_lock lock(store_->mu);
            if (!store_->inboxes.count(inbox_path)) {
                plain(res, 404, "no such inbox: " + inbox_path);
                return;
            }
        }
        if (!config_.sender_allowlist.empty()) {
            auto& list = config_.sender_allowlist;
            if (std::find(list.begin(), list.end(), req.remote_addr) == list.end()) {
                plain(res, 403, "sender not allowed");
                return;
            }
        }
        if (req.body.size() > config_.max_body_bytes) {
            plain(res, 413, "payload exceeds " + std::to_string(config_.max_body_bytes) +
                                " bytes");
            return;
        }
        const std::string content_type = req.get_header_value("Content-Type");
        auto format = wire::format_for_media_type(content_type);
        if (!format) {
            plain(res, 415, "unsupported media type: " + content_type);
            return;
        }

        wire::WireDocument doc{std::string(wire::media_type_of(*format)), req.body};
        auto parsed = wire::parse(doc);
        std::string notification_id;
        if (auto* failure = std::get_if<wire::ParseFailure>(&parsed)) {
            if (failure->kind == wire::ParseFailure::Kind::malformed) {
                plain(res, 400, "parse error: " + failure->message);
                return;
            }
            if (config_.enforce_profile) {
                plain(res, 422, "profile error: " + failure->message);
                return;
            }
            notification_id = uuid::urn_uuid();  // permissive mode: store as-is
        } else {
            const auto& n = std::get<as2::Notification>(parsed);
            if (config_.enforce_profile) {
                auto report = as2::validate_notification(n);
                if (!report.ok()) {
                    std::string detail;
                    for (const auto& f : report.errors) {
                        if (!detail.empty()) detail += "; ";
                        detail += f.code;
                    }
                    plain(res, 422, "profile error: " + detail);
                    return;
                }
            }
            notification_id = n.id;
        }

        std::shared_lock map_lock(store_->mu);
        auto& inbox = store_->inboxes.at(inbox_path);
        std::lock_guard inbox_lock(*inbox.mu);

        if (auto it = inbox.by_id.find(notification_id); it != inbox.by_id.end()) {
            // idempotent re-delivery
            res.status = 200;
            res.set_header("Location", inbox.items[it->second].resource_url);
            return;
        }

        StoredNotification item;
        item.id = notification_id;
        item.received_at = clock::iso8601_utc_now();
        if (!req.remote_addr.empty()) item.sender_hint = req.remote_addr;
        item.document = doc;
        const std::string resource_tail = uuid::random_uuid();
        const std::string file_name = resource_tail + body_extension(doc.media_type);
        item.resource_url = config_.base_url + inbox_path + "/" + resource_tail;

        write_file_atomically(inbox.dir / file_name, doc.body);
        {
            std::ofstream index(inbox.dir / "index.ndjson", std::ios::app);
            index << json{{"id", item.id},
                          {"resource", item.resource_url},
                          {"file", file_name},
                          {"media_type", item.document.media_type},
                          {"received_at", item.received_at},
                          {"sender", item.sender_hint.value_or("")}}
                         .dump()
                  << '\n';
            index.flush();
        }
        inbox.items.push_back(item);
        inbox.by_id[item.id] = inbox.items.size() - 1;
        inbox.by_resource[resource_tail] = inbox.items.size() - 1;

        res.status = 201;
        res.set_header("Location", item.resource_url);
    });

    // listing, notification resources, artifact pages
    server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string& path = req.path;
        std::shared_lock lock(store_->mu);

        if (auto it = store_->inboxes.find(path); it != store_->inboxes.end()) {
            json contains = json::array();
            {
                std::lock_guard inbox_lock(*it->second.mu);
                for (const auto& item : it->second.items) contains.push_back(item.resource_url);
            }
            json listing{
                {"@context",
                 {{"ldp", "http://www.w3.org/ns/ldp#"},
                  {"contains",
                   {{"@id", "ldp:contains"}, {"@type", "@id"}, {"@container", "@set"}}}}},
                {"@id", inbox_url(path)},
                {"@type", "ldp:BasicContainer"},
                {"contains", contains}};
            res.status = 200;
            res.set_content(listing.dump(2) + "\n", std::string(wire::media_jsonld));
            return;
        }

        // notification resource: <inbox>/<uuid>
        auto slash = path.find_last_of('/');
        if (slash != std::string::npos && slash > 0) {
            std::string inbox_path = path.substr(0, slash);
            std::string tail = path.substr(slash + 1);
            if (auto it = store_->inboxes.find(inbox_path); it != store_->inboxes.end()) {
                std::lock_guard inbox_lock(*it->second.mu);
                if (auto r = it->second.by_resource.find(tail);
                    r != it->second.by_resource.end()) {
                    const auto& item = it->second.items[r->second];
                    res.status = 200;
                    res.set_content(item.document.body, item.document.media_type);
                    return;
                }
            }
        }

        // artifact page with inbox advertisement (longest matching prefix)
        std::string best_prefix;
        std::string best_inbox;
        for (const auto& [prefix, inbox_path] : store_->artifact_inboxes) {
            if (path.rfind(prefix, 0) == 0 && prefix.size() > best_prefix.size()) {
                best_prefix = prefix;
                best_inbox = inbox_path;
            }
        }
        if (!best_prefix.empty()) {
            res.status = 200;
            res.set_header("Link", "<" + inbox_url(best_inbox) + ">; rel=\"" +
                                       std::string(ldp_inbox_rel) + "\"");
            res.set_content("<!doctype html><title>artifact</title><p>" + path + "</p>\n",
                            "text/html");
            return;
        }

        plain(res, 404, "not found: " + path);
    });
}

}  // namespace valuenet::inbox
