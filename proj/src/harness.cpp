// SPDX-License-Identifier: Apache-2.0

#include "valuenet/harness.hpp"

#include "valuenet/iri.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <fstream>
#include <map>
#include <random>
#include <set>

namespace valuenet::harness {

using nlohmann::json;

// ---------------------------------------------------------------------------
// MockPidServer
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> path_segments(const std::string& path) {
    std::vector<std::string> out;
    std::size_t start = 1;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        out.push_back(path.substr(start, end == std::string::npos ? path.size() - start
                                                                  : end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace

MockPidServer::MockPidServer() : server_(std::make_unique<httplib::Server>()) {
    server_->Get(".*", [](const httplib::Request& req, httplib::Response& res) {
        auto seg = path_segments(req.path);
        if (seg.size() == 3 && seg[0] == "r") {
            res.status = 302;
            res.set_header("Location", "http://" + seg[1] + "/artifact/" + seg[2]);
            return;
        }
        if (seg.size() == 4 && seg[0] == "hop") {
            int k = std::atoi(seg[1].c_str());
            res.status = 302;
            res.set_header("Location", k > 0 ? "/hop/" + std::to_string(k - 1) + "/" + seg[2] +
                                                   "/" + seg[3]
                                             : "http://" + seg[2] + "/artifact/" + seg[3]);
            return;
        }
        if (seg.size() == 2 && seg[0] == "loop") {
            res.status = 302;
            res.set_header("Location", "/loop/" + std::string(seg[1] == "a" ? "b" : "a"));
            return;
        }
        if (seg.size() == 2 && seg[0] == "artifact") {
            res.status = 200;
            res.set_content("<!doctype html><title>" + seg[1] + "</title>\n", "text/html");
            return;
        }
        if (seg.size() == 2 && seg[0] == "artifact-with-inbox") {
            std::string host = req.get_header_value("Host");
            res.status = 200;
            res.set_header("Link", "<http://" + host + "/inbox>; rel=\"" +
                                       std::string(discovery::ldp_inbox_rel) + "\"");
            res.set_content("<!doctype html><title>" + seg[1] + "</title>\n", "text/html");
            return;
        }
        if (seg.size() == 2 && seg[0] == "status") {
            res.status = std::atoi(seg[1].c_str());
            res.set_content("scripted status\n", "text/plain");
            return;
        }
        res.status = 404;
        res.set_content("unknown scripted path: " + req.path + "\n", "text/plain");
    });
}

MockPidServer::~MockPidServer() { stop(); }

void MockPidServer::start() {
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw HarnessSetupError("cannot bind mock PID server");
    thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void MockPidServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (thread_ && thread_->joinable()) thread_->join();
    thread_.reset();
}

discovery::HostOverride MockPidServer::override_all() const {
    int port = port_;
    return [port](const std::string&, int) { return std::make_pair(std::string("127.0.0.1"), port); };
}

// ---------------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------------

void write_synthetic_fixture(const std::filesystem::path& path, std::size_t n_links,
                             std::size_t n_hosts, unsigned seed) {
    if (n_hosts == 0) n_hosts = 1;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_host(0, n_hosts - 1);
    const char* relations[] = {"References", "IsSupplementTo", "IsRelatedTo"};

    json records = json::array();
    std::size_t endpoint_counter = 0;
    auto host_for = [&]() {
        // first pass covers every host once, then uniform
        std::size_t h = endpoint_counter < n_hosts ? endpoint_counter : pick_host(rng);
        ++endpoint_counter;
        return "org" + std::to_string(h) + ".example";
    };

    for (std::size_t i = 0; i < n_links; ++i) {
        const std::string src_host = host_for();
        const std::string tgt_host = host_for();
        json record{
            {"LinkPublicationDate", "2022-05-10"},
            {"LinkProvider", json::array({{{"Name", "synthetic"}}})},
            {"RelationshipType", {{"Name", relations[i % 3]}}},
            {"Source",
             {{"Identifier", json::array({{{"ID", "s" + std::to_string(i)},
                                           {"IDScheme", "url"},
                                           {"IDURL", "http://pid.example/r/" + src_host + "/s" +
                                                         std::to_string(i)}}})},
              {"Type", "publication"}}},
            {"Target",
             {{"Identifier", json::array({{{"ID", "t" + std::to_string(i)},
                                           {"IDScheme", "url"},
                                           {"IDURL", "http://pid.example/r/" + tgt_host + "/t" +
                                                         std::to_string(i)}}})},
              {"Type", "dataset"}}}};
        records.push_back(std::move(record));
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << records.dump(1) << "\n";
}

std::vector<std::string> fixture_hosts(const std::filesystem::path& path) {
    std::set<std::string> hosts;
    auto loaded = scholix::load_scholix(path);
    for (const auto& link : loaded.links) {
        for (const auto* endpoint : {&link.source, &link.target}) {
            if (!endpoint->url) continue;
            // mock convention: /r/{host}/{name}
            auto c = iri::split(*endpoint->url);
            if (!c) continue;
            auto seg = path_segments(c->path);
            if (seg.size() == 3 && seg[0] == "r") hosts.insert(seg[1]);
        }
    }
    return {hosts.begin(), hosts.end()};
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

std::vector<Discrepancy> verify_against(
    const std::vector<PlannedDelivery>& planned,
    const std::function<std::vector<inbox::StoredNotification>(const std::string&)>& stored_of) {
    std::vector<Discrepancy> out;
    std::map<std::string, std::map<std::string, std::size_t>> want;  // inbox path -> id -> count
    std::map<std::string, std::string> inbox_urls;
    for (const auto& p : planned) {
        ++want[p.inbox_path][p.notification_id];
        inbox_urls[p.inbox_path] = p.inbox_url;
    }
    for (const auto& [inbox_path, ids] : want) {
        std::map<std::string, std::size_t> have;
        for (const auto& item : stored_of(inbox_path)) ++have[item.id];
        for (const auto& [id, count] : ids) {
            auto it = have.find(id);
            const std::size_t actual = it == have.end() ? 0 : it->second;
            if (actual == 0) {
                out.push_back({inbox_urls[inbox_path], id, "missing"});
            } else if (actual > 1) {
                out.push_back({inbox_urls[inbox_path], id, "duplicate"});
            }
            if (count > 1) {
                // planning the same notification twice for one inbox is a
                // harness bug, surface it
                out.push_back({inbox_urls[inbox_path], id, "duplicate-plan"});
            }
        }
        for (const auto& [id, _] : have) {
            if (!ids.count(id)) out.push_back({inbox_urls[inbox_path], id, "unexpected"});
        }
    }
    return out;
}

}  // namespace

std::vector<Discrepancy> verify_delivery(const std::vector<PlannedDelivery>& planned,
                                         const inbox::InboxServer& server) {
    return verify_against(planned,
                          [&](const std::string& path) { return server.stored(path); });
}

std::vector<Discrepancy> verify_storage(const std::vector<PlannedDelivery>& planned,
                                        const std::filesystem::path& storage_dir) {
    return verify_against(planned, [&](const std::string& path) {
        return inbox::read_inbox_storage(storage_dir, path);
    });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

ExperimentReport simulate(const SimulateConfig& config) {
    for (const auto& institution : config.institutions) {
        if (!std::filesystem::exists(institution.scholix_file)) {
            throw HarnessSetupError("fixture not readable: " +
                                    institution.scholix_file.string());
        }
    }
    std::filesystem::create_directories(config.workdir);

    ExperimentReport report;

    MockPidServer pid_server;
    pid_server.start();

    inbox::InboxConfig inbox_config;
    inbox_config.storage_dir = config.workdir / "inbox-storage";
    inbox::InboxServer server(std::move(inbox_config));
    server.start();
    report.storage_dir = config.workdir / "inbox-storage";
    report.proxy_base = server.base_url();

    discovery::Resolver::Options resolver_options;
    resolver_options.host_override = pid_server.override_all();
    resolver_options.limits.timeout = std::chrono::seconds(10);
    discovery::Resolver resolver(resolver_options);

    for (const auto& institution : config.institutions) {
        InstitutionRow row;
        row.name = institution.name;

        auto loaded = scholix::load_scholix(institution.scholix_file);
        row.links_loaded = loaded.links.size();
        row.records_skipped = loaded.skipped.size() + loaded.schema_errors.size();
        row.records_in_file = row.links_loaded + row.records_skipped;
        row.planned = 2 * row.links_loaded;

        // distinct endpoint URLs, in first-use order
        std::vector<discovery::PidUrl> pids;
        std::set<std::string> seen;
        for (const auto& link : loaded.links) {
            for (const auto* endpoint : {&link.source, &link.target}) {
                if (!endpoint->url || !seen.insert(*endpoint->url).second) continue;
                pids.push_back(endpoint->pid ? *endpoint->pid
                                             : discovery::make_pid(
                                                   discovery::PidScheme::http_url, *endpoint->url));
            }
        }

        const auto resolve_started = std::chrono::steady_clock::now();
        auto resolutions = resolver.resolve_all(pids, config.resolve_concurrency);
        row.resolve_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                         resolve_started)
                               .count();

        std::map<std::string, std::string> resolved;
        std::map<std::string, discovery::InboxRef> inbox_map;
        double elapsed_total = 0.0;
        for (const auto& r : resolutions) {
            elapsed_total += static_cast<double>(r.elapsed.count()) / 1000.0;
            if (!r.ok()) continue;
            ++row.artifact_urls;
            resolved[r.pid.url_form] = r.landing_url;
            const std::string host = iri::host_of(r.landing_url);
            if (inbox_map.count(host)) continue;
            std::optional<discovery::InboxRef> ref;
            if (config.discover_via_headers) {
                ref = discovery::discover_inbox(r.landing_url, r.final_headers, r.final_body);
            }
            if (!ref) ref = discovery::generate_proxy_inbox(r.landing_url, report.proxy_base);
            inbox_map.emplace(host, *ref);
        }
        row.resolve_time_per_req_s = resolutions.empty()
                                         ? 0.0
                                         : elapsed_total / static_cast<double>(resolutions.size());

        // the proxy hosts one inbox per landing host
        for (const auto& [host, ref] : inbox_map) {
            if (ref.inbox_url.rfind(report.proxy_base, 0) == 0) {
                server.create_inbox(ref.inbox_url.substr(report.proxy_base.size()));
            }
        }
        row.inboxes_created = inbox_map.size();

        scholix::FanOutConfig fan_config;
        fan_config.actor = {"https://scholexplorer.openaire.eu/#about",
                            as2::AgentKind::service, "ScholeXplorer", std::nullopt};
        fan_config.origin = {"https://mellonscholarlycommunication.github.io/about#us",
                             as2::AgentKind::service, "Notification sender", std::nullopt};
        auto fanned = scholix::fan_out(loaded.links, resolved, inbox_map, fan_config);
        row.skipped_messages = fanned.skipped.size();

        std::vector<std::pair<as2::Notification, std::string>> to_send;
        to_send.reserve(fanned.items.size());
        for (const auto& item : fanned.items) {
            to_send.emplace_back(item.notification, item.inbox.inbox_url);
        }
        auto plan = delivery::make_plan(to_send, config.send_concurrency, config.retry,
                                        config.rate_limit);

        delivery::Sender::Options sender_options;
        sender_options.journal = config.workdir / ("receipts-" + institution.name + ".ndjson");
        delivery::Sender sender(sender_options);
        auto outcome = sender.send_all(plan);
        row.delivered = outcome.stats.succeeded;
        row.failed = outcome.stats.failed;
        row.post_secs = std::chrono::duration<double>(outcome.stats.wall).count();
        row.req_per_sec = outcome.stats.req_per_sec;

        for (const auto& item : fanned.items) {
            std::string path = item.inbox.inbox_url.rfind(report.proxy_base, 0) == 0
                                   ? item.inbox.inbox_url.substr(report.proxy_base.size())
                                   : item.inbox.inbox_url;
            report.planned.push_back({path, item.inbox.inbox_url, item.notification.id});
        }

        if (row.planned != row.delivered + row.failed + row.skipped_messages) {
            report.discrepancies.push_back(
                {institution.name, "", "conservation"});  // planned != delivered+skipped+failed
        }
        report.rows.push_back(row);
    }

    auto delivery_issues = verify_delivery(report.planned, server);
    report.discrepancies.insert(report.discrepancies.end(), delivery_issues.begin(),
                                delivery_issues.end());

    // deterministic teardown: sender already drained, journals flushed per
    // send_all, server last
    server.stop();
    pid_server.stop();

    std::ofstream out(config.workdir / "report.json", std::ios::trunc);
    out << report_to_json(report).dump(2) << "\n";
    return report;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

std::string render_report(const ExperimentReport& report) {
    std::string out;
    out += fmt::format("{:<16} {:>9} {:>15} {:>19} {:>12}\n", "Institution", "#Records",
                       "#Artifact URLs", "#Resolve time (s)", "time/req");
    for (const auto& r : report.rows) {
        out += fmt::format("{:<16} {:>9} {:>15} {:>19.1f} {:>10.3f} s\n", r.name,
                           r.records_in_file, r.artifact_urls, r.resolve_secs,
                           r.resolve_time_per_req_s);
    }
    out += "\n";
    out += fmt::format("{:<16} {:>20} {:>17} {:>9}\n", "Institution", "#Sent Notifications",
                       "#Post time (s)", "req/sec");
    for (const auto& r : report.rows) {
        out += fmt::format("{:<16} {:>20} {:>17.1f} {:>9.0f}\n", r.name, r.delivered + r.failed,
                           r.post_secs, r.req_per_sec);
    }
    out += "\n";
    for (const auto& r : report.rows) {
        out += fmt::format(
            "{}: {} inboxes, planned {} = delivered {} + failed {} + skipped {}\n", r.name,
            r.inboxes_created, r.planned, r.delivered, r.failed, r.skipped_messages);
    }
    out += fmt::format("discrepancies: {}\n", report.discrepancies.size());
    for (const auto& d : report.discrepancies) {
        out += fmt::format("  {} {} {}\n", d.kind, d.inbox_url, d.notification_id);
    }
    return out;
}

json report_to_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"institution", r.name},
                        {"records_in_file", r.records_in_file},
                        {"links_loaded", r.links_loaded},
                        {"records_skipped", r.records_skipped},
                        {"artifact_urls", r.artifact_urls},
                        {"resolve_secs", r.resolve_secs},
                        {"resolve_time_per_req_s", r.resolve_time_per_req_s},
                        {"inboxes_created", r.inboxes_created},
                        {"planned", r.planned},
                        {"delivered", r.delivered},
                        {"failed", r.failed},
                        {"skipped_messages", r.skipped_messages},
                        {"post_secs", r.post_secs},
                        {"req_per_sec", r.req_per_sec}});
    }
    json discrepancies = json::array();
    for (const auto& d : report.discrepancies) {
        discrepancies.push_back(
            {{"inbox_url", d.inbox_url}, {"notification_id", d.notification_id}, {"kind", d.kind}});
    }
    json planned = json::array();
    for (const auto& p : report.planned) {
        planned.push_back({{"inbox_path", p.inbox_path},
                           {"inbox_url", p.inbox_url},
                           {"notification_id", p.notification_id}});
    }
    return json{{"rows", rows},
                {"discrepancies", discrepancies},
                {"planned", planned},
                {"storage_dir", report.storage_dir.string()},
                {"proxy_base", report.proxy_base}};
}

}  // namespace valuenet::harness
