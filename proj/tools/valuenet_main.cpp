// SPDX-License-Identifier: Apache-2.0
//
// valuenet: build, send, receive and track profiled ActivityStreams 2.0
// notifications between data nodes and service nodes.

#include "valuenet/delivery.hpp"
#include "valuenet/discovery.hpp"
#include "valuenet/harness.hpp"
#include "valuenet/inbox_server.hpp"
#include "valuenet/iri.hpp"
#include "valuenet/scholix.hpp"
#include "valuenet/serialization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

volatile std::sig_atomic_t g_stop_requested = 0;
void handle_signal(int) { g_stop_requested = 1; }

// --- serve -------------------------------------------------------------------

struct ServeSettings {
    std::string config_file;
};

int run_serve(const ServeSettings& settings) {
    valuenet::inbox::InboxConfig config;
    std::string bind = "127.0.0.1";
    int port = 3000;

    std::ifstream in(settings.config_file);
    if (!in) {
        std::cerr << "cannot open config: " << settings.config_file << "\n";
        return 2;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::cerr << settings.config_file << ":" << line_no << ": expected key=value\n";
            return 2;
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "base_url") config.base_url = value;
        else if (key == "storage_dir") config.storage_dir = value;
        else if (key == "max_body_bytes") config.max_body_bytes = std::stoul(value);
        else if (key == "inbox") config.inbox_paths.push_back(value);
        else if (key == "artifact") {
            auto sep = value.find('=');
            if (sep == std::string::npos) {
                std::cerr << settings.config_file << ":" << line_no
                          << ": artifact wants prefix=inbox\n";
                return 2;
            }
            config.artifact_inboxes[value.substr(0, sep)] = value.substr(sep + 1);
        } else if (key == "allow") config.sender_allowlist.push_back(value);
        else if (key == "permissive") config.enforce_profile = value != "true" && value != "1";
        else if (key == "bind") bind = value;
        else if (key == "port") port = std::stoi(value);
        else {
            std::cerr << settings.config_file << ":" << line_no << ": unknown key '" << key
                      << "'\n";
            return 2;
        }
    }
    if (config.storage_dir.empty()) config.storage_dir = "inbox-storage";

    valuenet::inbox::InboxServer server(std::move(config));
    server.start(bind, port);
    std::cout << "listening on " << server.base_url() << "\n";
    for (const auto& path : server.inbox_paths()) {
        std::cout << "  inbox " << server.inbox_url(path) << "\n";
    }
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    server.stop();
    return 0;
}

// --- resolve -----------------------------------------------------------------

struct ResolveSettings {
    std::string in_file;
    std::string out_file;
    int max_hops = 10;
    int timeout_s = 30;
    int concurrency = 4;
    bool no_cache = false;
    int politeness_ms = 0;
};

int run_resolve(const ResolveSettings& settings) {
    std::ifstream in(settings.in_file);
    if (!in) {
        std::cerr << "cannot open " << settings.in_file << "\n";
        return 2;
    }
    std::vector<valuenet::discovery::PidUrl> pids;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (first && !fields.empty() && fields[0] == "scheme") {
            first = false;
            continue;  // header row
        }
        first = false;
        try {
            if (fields.size() >= 2) {
                auto scheme = valuenet::discovery::pid_scheme_from_string(fields[0]);
                if (!scheme) {
                    std::cerr << "unknown PID scheme: " << fields[0] << "\n";
                    return 2;
                }
                pids.push_back(valuenet::discovery::make_pid(*scheme, fields[1]));
            } else {
                pids.push_back(valuenet::discovery::make_pid(
                    valuenet::discovery::PidScheme::http_url, fields[0]));
            }
        } catch (const std::exception& e) {
            std::cerr << "bad input line: " << line << " (" << e.what() << ")\n";
            return 2;
        }
    }

    valuenet::discovery::Resolver::Options options;
    options.limits.max_hops = settings.max_hops;
    options.limits.timeout = std::chrono::seconds(settings.timeout_s);
    options.cache = !settings.no_cache;
    options.politeness = std::chrono::milliseconds(settings.politeness_ms);
    valuenet::discovery::Resolver resolver(options);
    auto results = resolver.resolve_all(pids, settings.concurrency);

    std::ofstream out(settings.out_file, std::ios::trunc);
    out << "scheme,raw,url_form,landing_url,hops,status,elapsed_ms\n";
    for (const auto& r : results) {
        std::string status =
            r.error ? std::string(valuenet::discovery::to_string(*r.error))
                    : std::to_string(r.status);
        out << csv_quote(std::string(valuenet::discovery::to_string(r.pid.scheme))) << ","
            << csv_quote(r.pid.raw) << "," << csv_quote(r.pid.url_form) << ","
            << csv_quote(r.landing_url) << "," << r.hops << "," << status << ","
            << r.elapsed.count() << "\n";
    }
    std::cout << "resolved " << results.size() << " PID-URLs -> " << settings.out_file << "\n";
    return 0;
}

// --- ingest ------------------------------------------------------------------

struct IngestSettings {
    std::string scholix_file;
    std::string resolved_file;
    std::string out_file;
    std::string skips_file;
    std::string proxy_base;
    std::string inverse_table_file;
    std::string actor_id = "https://scholexplorer.openaire.eu/#about";
    std::string actor_name = "ScholeXplorer";
    std::string origin_id = "https://mellonscholarlycommunication.github.io/about#us";
    std::string origin_name = "Notification sender";
};

int run_ingest(const IngestSettings& settings) {
    auto loaded = valuenet::scholix::load_scholix(settings.scholix_file);
    for (const auto& err : loaded.schema_errors) std::cerr << "schema: " << err << "\n";

    // resolved.csv: url_form -> landing_url (from the resolve subcommand)
    std::map<std::string, std::string> resolved;
    {
        std::ifstream in(settings.resolved_file);
        if (!in) {
            std::cerr << "cannot open " << settings.resolved_file << "\n";
            return 2;
        }
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto fields = split_csv_line(line);
            if (first) {
                first = false;
                if (!fields.empty() && fields[0] == "scheme") continue;
            }
            if (fields.size() >= 6 && fields[5] == "200") resolved[fields[2]] = fields[3];
        }
    }

    std::map<std::string, valuenet::discovery::InboxRef> inbox_map;
    for (const auto& [url, landing] : resolved) {
        (void)url;
        auto host = valuenet::iri::host_of(landing);
        if (!inbox_map.count(host)) {
            inbox_map.emplace(host, valuenet::discovery::generate_proxy_inbox(
                                        landing, settings.proxy_base));
        }
    }

    valuenet::scholix::FanOutConfig config;
    config.actor = {settings.actor_id, valuenet::as2::AgentKind::service, settings.actor_name,
                    std::nullopt};
    config.origin = {settings.origin_id, valuenet::as2::AgentKind::service, settings.origin_name,
                     std::nullopt};
    auto table = settings.inverse_table_file.empty()
                     ? valuenet::scholix::InverseTable::builtin()
                     : valuenet::scholix::InverseTable::from_file(settings.inverse_table_file);
    auto fanned = valuenet::scholix::fan_out(loaded.links, resolved, inbox_map, config, table);

    std::ofstream out(settings.out_file, std::ios::trunc);
    for (const auto& item : fanned.items) {
        auto doc = valuenet::wire::serialize(item.notification, valuenet::wire::Format::jsonld);
        out << json{{"inbox", item.inbox.inbox_url},
                    {"media_type", doc.media_type},
                    {"body", doc.body}}
                   .dump()
            << "\n";
    }

    if (!settings.skips_file.empty()) {
        std::ofstream skips(settings.skips_file, std::ios::trunc);
        skips << "record_index,endpoint,reason\n";
        for (const auto& s : loaded.skipped) {
            skips << s.record_index << "," << csv_quote(s.endpoint) << "," << csv_quote(s.reason)
                  << "\n";
        }
        for (const auto& s : fanned.skipped) {
            skips << s.record_index << "," << csv_quote(s.endpoint) << "," << csv_quote(s.reason)
                  << "\n";
        }
    }
    std::cout << "ingested " << loaded.links.size() << " links -> " << fanned.items.size()
              << " notifications (" << fanned.skipped.size() + loaded.skipped.size()
              << " skipped) -> " << settings.out_file << "\n";
    return 0;
}

// --- send --------------------------------------------------------------------

struct SendSettings {
    std::string plan_file;
    std::string journal_file;
    std::string failed_out;
    int concurrency = 4;
    double rate = 0.0;
    int max_attempts = 3;
    int backoff_ms = 250;
};

int run_send(const SendSettings& settings) {
    valuenet::delivery::SendPlan plan;
    plan.concurrency = settings.concurrency;
    plan.retry.max_attempts = settings.max_attempts;
    plan.retry.backoff_base = std::chrono::milliseconds(settings.backoff_ms);
    if (settings.rate > 0) plan.rate_limit = settings.rate;

    std::ifstream in(settings.plan_file);
    if (!in) {
        std::cerr << "cannot open " << settings.plan_file << "\n";
        return 2;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("inbox") ||
            !record.contains("body")) {
            std::cerr << settings.plan_file << ":" << line_no << ": bad plan line\n";
            return 2;
        }
        valuenet::delivery::PlanItem item;
        item.inbox_url = record["inbox"].get<std::string>();
        item.document.media_type =
            record.value("media_type", std::string(valuenet::wire::media_jsonld));
        item.document.body = record["body"].get<std::string>();
        auto body = json::parse(item.document.body, nullptr, false);
        item.notification_id = !body.is_discarded() && body.is_object()
                                   ? body.value("id", "line-" + std::to_string(line_no))
                                   : "line-" + std::to_string(line_no);
        plan.items.push_back(std::move(item));
    }

    valuenet::delivery::Sender::Options options;
    if (!settings.journal_file.empty()) options.journal = settings.journal_file;
    valuenet::delivery::Sender sender(options);
    auto outcome = sender.send_all(plan);

    std::cout << "sent " << outcome.stats.total << ": " << outcome.stats.succeeded
              << " succeeded, " << outcome.stats.failed << " failed, "
              << outcome.stats.wall.count() << " ms, " << outcome.stats.req_per_sec
              << " req/sec\n";

    if (!settings.failed_out.empty()) {
        auto remaining = valuenet::delivery::replay_failures(outcome.receipts, plan);
        std::ofstream out(settings.failed_out, std::ios::trunc);
        for (const auto& item : remaining.items) {
            out << json{{"inbox", item.inbox_url},
                        {"media_type", item.document.media_type},
                        {"body", item.document.body}}
                       .dump()
                << "\n";
        }
        std::cout << remaining.items.size() << " failures -> " << settings.failed_out << "\n";
    }
    return outcome.stats.failed == 0 ? 0 : 1;
}

// --- simulate ------------------------------------------------------------------

struct SimulateSettings {
    std::vector<std::string> fixtures;  // name=path
    std::string workdir = "simulation";
    std::size_t gen_links = 0;
    std::size_t gen_hosts = 50;
    unsigned gen_seed = 7;
    int concurrency = 4;
    double rate = 0.0;
};

int run_simulate(const SimulateSettings& settings) {
    valuenet::harness::SimulateConfig config;
    config.workdir = settings.workdir;
    config.resolve_concurrency = settings.concurrency;
    config.send_concurrency = settings.concurrency;
    if (settings.rate > 0) config.rate_limit = settings.rate;

    if (settings.gen_links > 0) {
        auto path = std::filesystem::path(settings.workdir) / "synthetic-fixture.json";
        valuenet::harness::write_synthetic_fixture(path, settings.gen_links, settings.gen_hosts,
                                                   settings.gen_seed);
        config.institutions.push_back({"synthetic", path});
        std::cout << "generated fixture: " << path.string() << "\n";
    }
    for (const auto& spec : settings.fixtures) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
            config.institutions.push_back({std::filesystem::path(spec).stem().string(), spec});
        } else {
            config.institutions.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
        }
    }
    if (config.institutions.empty()) {
        std::cerr << "nothing to simulate: pass --fixture or --gen-links\n";
        return 2;
    }

    auto report = valuenet::harness::simulate(config);
    std::cout << valuenet::harness::render_report(report);
    std::cout << "report: " << (config.workdir / "report.json").string() << "\n";
    return report.discrepancies.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Profiled AS2/LDN notifications for value-adding networks"};
    app.require_subcommand(1);

    ServeSettings serve_settings;
    auto* serve = app.add_subcommand("serve", "Run an LDN inbox server");
    serve->add_option("--config", serve_settings.config_file, "key=value config file")
        ->required();

    ResolveSettings resolve_settings;
    auto* resolve = app.add_subcommand("resolve", "Resolve PID-URLs to landing pages");
    resolve->add_option("--in", resolve_settings.in_file, "CSV of scheme,raw or bare URLs")
        ->required();
    resolve->add_option("--out", resolve_settings.out_file, "output CSV")->required();
    resolve->add_option("--max-hops", resolve_settings.max_hops, "redirect limit");
    resolve->add_option("--timeout", resolve_settings.timeout_s, "per-request timeout (s)");
    resolve->add_option("--concurrency", resolve_settings.concurrency, "parallel requests");
    resolve->add_flag("--no-cache", resolve_settings.no_cache,
                      "resolve every URL even when repeated");
    resolve->add_option("--politeness-ms", resolve_settings.politeness_ms,
                        "per-host delay between requests");

    IngestSettings ingest_settings;
    auto* ingest = app.add_subcommand("ingest", "Turn Scholix links into notifications");
    ingest->add_option("--scholix", ingest_settings.scholix_file, "Scholix JSON package file")
        ->required();
    ingest->add_option("--resolved", ingest_settings.resolved_file, "CSV from `resolve`")
        ->required();
    ingest->add_option("--out", ingest_settings.out_file, "notification plan (NDJSON)")
        ->required();
    ingest->add_option("--proxy-base", ingest_settings.proxy_base,
                       "base URL hosting the per-host inboxes")
        ->required();
    ingest->add_option("--skips", ingest_settings.skips_file, "skip report CSV");
    ingest->add_option("--inverse-table", ingest_settings.inverse_table_file,
                       "JSON file of inverse relation pairs");
    ingest->add_option("--actor", ingest_settings.actor_id, "actor agent IRI");
    ingest->add_option("--actor-name", ingest_settings.actor_name, "actor display name");
    ingest->add_option("--origin", ingest_settings.origin_id, "origin agent IRI");
    ingest->add_option("--origin-name", ingest_settings.origin_name, "origin display name");

    SendSettings send_settings;
    auto* send = app.add_subcommand("send", "Push a notification plan to inboxes");
    send->add_option("--plan", send_settings.plan_file, "NDJSON plan from `ingest`")->required();
    send->add_option("--concurrency", send_settings.concurrency, "worker pool size");
    send->add_option("--rate", send_settings.rate, "request rate limit per second");
    send->add_option("--max-attempts", send_settings.max_attempts, "attempts per item");
    send->add_option("--backoff-ms", send_settings.backoff_ms, "base retry backoff");
    send->add_option("--journal", send_settings.journal_file, "receipt journal (NDJSON)");
    send->add_option("--failed-out", send_settings.failed_out,
                     "write a replay plan of failed items");

    SimulateSettings simulate_settings;
    auto* simulate =
        app.add_subcommand("simulate", "Run the end-to-end experiment locally");
    simulate->add_option("--fixture", simulate_settings.fixtures,
                         "institution fixture as name=path (repeatable)");
    simulate->add_option("--workdir", simulate_settings.workdir, "working directory");
    simulate->add_option("--gen-links", simulate_settings.gen_links,
                         "generate a synthetic fixture with this many links");
    simulate->add_option("--gen-hosts", simulate_settings.gen_hosts,
                         "hosts in the generated fixture");
    simulate->add_option("--gen-seed", simulate_settings.gen_seed, "generator seed");
    simulate->add_option("--concurrency", simulate_settings.concurrency, "worker pool size");
    simulate->add_option("--rate", simulate_settings.rate, "request rate limit per second");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) return run_serve(serve_settings);
        if (resolve->parsed()) return run_resolve(resolve_settings);
        if (ingest->parsed()) return run_ingest(ingest_settings);
        if (send->parsed()) return run_send(send_settings);
        if (simulate->parsed()) return run_simulate(simulate_settings);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
