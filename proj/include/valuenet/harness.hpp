// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/delivery.hpp"
#include "valuenet/inbox_server.hpp"
#include "valuenet/scholix.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace valuenet::harness {

/// Scripted HTTP stand-in for an arbitrary network of hosts. Serves, for any
/// Host header:
///   /r/{host}/{name}          302 -> http://{host}/artifact/{name}
///   /hop/{k}/{host}/{name}    k extra redirects before the chain above
///   /loop/a <-> /loop/b       an endless redirect cycle
///   /artifact/{name}          200 landing page, no inbox advertised
///   /artifact-with-inbox/{name}  200 + ldp#inbox Link header for the host
///   /status/{code}            that status, no Location
/// Point a discovery::HostOverride at it to simulate many hosts offline.
class MockPidServer {
public:
    MockPidServer();
    ~MockPidServer();

    void start();
    void stop();
    int port() const { return port_; }

    /// Override mapping every host to this server.
    discovery::HostOverride override_all() const;

private:
    std::unique_ptr<httplib::Server> server_;
    std::unique_ptr<std::thread> thread_;
    int port_ = 0;
};

/// Deterministic Scholix fixture: n_links records whose endpoint PID-URLs
/// follow the MockPidServer conventions, endpoints spread over n_hosts
/// distinct landing hosts ("org0.example", ...). Every host is used at
/// least once when n_links * 2 >= n_hosts.
void write_synthetic_fixture(const std::filesystem::path& path, std::size_t n_links,
                             std::size_t n_hosts, unsigned seed);

/// Landing hosts a fixture will produce, recomputed from the file alone;
/// the independent expectation for inbox counting.
std::vector<std::string> fixture_hosts(const std::filesystem::path& path);

struct InstitutionFixture {
    std::string name;
    std::filesystem::path scholix_file;
};

struct SimulateConfig {
    std::vector<InstitutionFixture> institutions;
    std::filesystem::path workdir;  // server storage, receipts, reports
    int resolve_concurrency = 4;
    int send_concurrency = 4;
    std::optional<double> rate_limit;
    delivery::RetryPolicy retry;
    bool discover_via_headers = true;  // try Link-header discovery before generating
};

struct PlannedDelivery {
    std::string inbox_path;
    std::string inbox_url;
    std::string notification_id;
};

struct InstitutionRow {
    std::string name;
    std::size_t records_in_file = 0;   // all records, including skipped ones
    std::size_t links_loaded = 0;
    std::size_t records_skipped = 0;   // load-time skip report entries
    std::size_t artifact_urls = 0;     // distinct endpoint URLs that resolved
    double resolve_secs = 0.0;
    double resolve_time_per_req_s = 0.0;
    std::size_t inboxes_created = 0;
    std::size_t planned = 0;           // 2 x links_loaded
    std::size_t delivered = 0;
    std::size_t failed = 0;
    std::size_t skipped_messages = 0;  // fan-out skip entries
    double post_secs = 0.0;
    double req_per_sec = 0.0;
};

struct Discrepancy {
    std::string inbox_url;
    std::string notification_id;
    std::string kind;  // "missing", "duplicate", "unexpected", "conservation"
};

struct ExperimentReport {
    std::vector<InstitutionRow> rows;
    std::vector<PlannedDelivery> planned;
    std::vector<Discrepancy> discrepancies;
    std::filesystem::path storage_dir;
    std::string proxy_base;
};

class HarnessSetupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run the whole pipeline offline: a multi-tenant inbox server as the proxy
/// network, a MockPidServer for resolution, then load -> resolve -> discover
/// -> fan out -> send -> verify, one row per institution.
ExperimentReport simulate(const SimulateConfig& config);

/// Every planned notification present exactly once in exactly the planned
/// inbox. Live-server variant used inside simulate.
std::vector<Discrepancy> verify_delivery(const std::vector<PlannedDelivery>& planned,
                                         const inbox::InboxServer& server);

/// Post-hoc variant reading inbox storage from disk.
std::vector<Discrepancy> verify_storage(const std::vector<PlannedDelivery>& planned,
                                        const std::filesystem::path& storage_dir);

/// Human-readable report mirroring the resolution and send statistics
/// tables, plus the discrepancy summary.
std::string render_report(const ExperimentReport& report);

nlohmann::json report_to_json(const ExperimentReport& report);

}  // namespace valuenet::harness
