// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "valuenet/harness.hpp"
#include "valuenet/iri.hpp"
#include "valuenet/serialization.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>

using namespace valuenet;
using namespace valuenet::testing;
using nlohmann::json;

namespace {

/// Brute-force expectation straight from the fixture file: per landing host,
/// the multiset of (context, subject, relationship, object) statements its
/// inbox must end up holding.
using StatementKey = std::tuple<std::string, std::string, std::string, std::string>;

std::map<std::string, std::multiset<StatementKey>> expected_deliveries(
    const std::filesystem::path& fixture) {
    std::map<std::string, std::multiset<StatementKey>> out;
    auto loaded = scholix::load_scholix(fixture);
    auto table = scholix::InverseTable::builtin();
    auto host_of_url = [](const std::string& url) {
        // mock convention: http://pid.example/r/{host}/{name} lands on {host}
        auto c = iri::split(url);
        REQUIRE(c);
        std::vector<std::string> seg;
        std::size_t start = 1;
        while (start <= c->path.size()) {
            auto end = c->path.find('/', start);
            seg.push_back(c->path.substr(start, end == std::string::npos
                                                    ? c->path.size() - start
                                                    : end - start));
            if (end == std::string::npos) break;
            start = end + 1;
        }
        REQUIRE(seg.size() == 3);
        return seg[1];
    };
    for (const auto& link : loaded.links) {
        auto rel_f = scholix::link_to_relationship(link, scholix::Direction::forward, table);
        out[host_of_url(*link.source.url)].insert(
            {rel_f.subject, rel_f.subject, rel_f.relationship, rel_f.object});
        auto rel_i = scholix::link_to_relationship(link, scholix::Direction::inverse, table);
        out[host_of_url(*link.target.url)].insert(
            {rel_i.subject, rel_i.subject, rel_i.relationship, rel_i.object});
    }
    return out;
}

}  // namespace

TEST_CASE("a 10-link network across 6 hosts delivers per the brute-force map") {
    TempDir tmp;
    auto fixture = tmp.path() / "ten.json";
    harness::write_synthetic_fixture(fixture, 10, 6, 99);

    auto hosts = harness::fixture_hosts(fixture);
    CHECK(hosts.size() == 6);  // the generator covers every host first

    harness::SimulateConfig config;
    config.workdir = tmp.path() / "run";
    config.institutions = {{"ten", fixture}};
    auto report = harness::simulate(config);

    REQUIRE(report.rows.size() == 1);
    const auto& row = report.rows[0];
    CHECK(row.links_loaded == 10);
    CHECK(row.planned == 20);
    CHECK(row.delivered == 20);
    CHECK(row.failed == 0);
    CHECK(row.skipped_messages == 0);
    CHECK(row.inboxes_created == 6);
    CHECK(report.discrepancies.empty());
    CHECK(row.req_per_sec > 0);

    // conservation, exactly
    CHECK(row.planned == row.delivered + row.failed + row.skipped_messages);

    // inbox contents match the brute-force expected-delivery map
    auto expected = expected_deliveries(fixture);
    std::size_t total_stored = 0;
    for (const auto& [host, statements] : expected) {
        auto items = inbox::read_inbox_storage(report.storage_dir, "/" + host + "/inbox");
        std::multiset<StatementKey> got;
        for (const auto& item : items) {
            auto parsed = wire::parse(item.document);
            REQUIRE(wire::ok(parsed));
            const auto& n = std::get<as2::Notification>(parsed);
            REQUIRE(n.has_relationship_object());
            got.insert({n.context.value_or(""), n.relationship_object()->subject,
                        n.relationship_object()->relationship,
                        n.relationship_object()->object});
        }
        CHECK(got == statements);
        total_stored += items.size();
    }
    CHECK(total_stored == 20);
}

TEST_CASE("an empty fixture produces a zero row and a clean shutdown") {
    TempDir tmp;
    auto fixture = tmp.path() / "empty.json";
    std::ofstream(fixture) << "[]";
    harness::SimulateConfig config;
    config.workdir = tmp.path() / "run";
    config.institutions = {{"empty", fixture}};
    auto report = harness::simulate(config);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].links_loaded == 0);
    CHECK(report.rows[0].planned == 0);
    CHECK(report.rows[0].inboxes_created == 0);
    CHECK(report.discrepancies.empty());
}

TEST_CASE("a missing fixture is a setup error") {
    harness::SimulateConfig config;
    config.workdir = std::filesystem::temp_directory_path() / "valuenet-none";
    config.institutions = {{"gone", "/no/such/file.json"}};
    CHECK_THROWS_AS(harness::simulate(config), harness::HarnessSetupError);
}

TEST_CASE("records without URLs are skipped and reported, not delivered") {
    TempDir tmp;
    auto fixture = tmp.path() / "mixed.json";
    json records = json::array();
    // one good record
    records.push_back(
        json{{"RelationshipType", {{"Name", "References"}}},
             {"Source",
              {{"Identifier",
                json::array({{{"ID", "s"},
                              {"IDScheme", "url"},
                              {"IDURL", "http://pid.example/r/orgA.example/s"}}})}}},
             {"Target",
              {{"Identifier",
                json::array({{{"ID", "t"},
                              {"IDScheme", "url"},
                              {"IDURL", "http://pid.example/r/orgB.example/t"}}})}}}});
    // one record with an identifier that has no URL form
    records.push_back(json{{"RelationshipType", {{"Name", "References"}}},
                           {"Source",
                            {{"Identifier",
                              json::array({{{"ID", "local-1"}, {"IDScheme", "lirias"}}})}}},
                           {"Target",
                            {{"Identifier",
                              json::array({{{"ID", "t2"},
                                            {"IDScheme", "url"},
                                            {"IDURL", "http://pid.example/r/orgB.example/t2"}}})}}}});
    std::ofstream(fixture) << records.dump();

    harness::SimulateConfig config;
    config.workdir = tmp.path() / "run";
    config.institutions = {{"mixed", fixture}};
    auto report = harness::simulate(config);
    const auto& row = report.rows[0];
    CHECK(row.records_in_file == 2);
    CHECK(row.links_loaded == 1);
    CHECK(row.records_skipped == 1);
    CHECK(row.planned == 2);
    CHECK(row.delivered == 2);
    CHECK(report.discrepancies.empty());
}

TEST_CASE("verify_storage pinpoints a manually deleted notification") {
    TempDir tmp;
    auto fixture = tmp.path() / "five.json";
    harness::write_synthetic_fixture(fixture, 5, 3, 1);
    harness::SimulateConfig config;
    config.workdir = tmp.path() / "run";
    config.institutions = {{"five", fixture}};
    auto report = harness::simulate(config);
    REQUIRE(report.discrepancies.empty());
    REQUIRE(report.planned.size() == 10);

    CHECK(harness::verify_storage(report.planned, report.storage_dir).empty());

    // remove one stored body file; its index entry now dangles
    const auto& victim = report.planned.front();
    bool removed = false;
    auto items = inbox::read_inbox_storage(report.storage_dir, victim.inbox_path);
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(report.storage_dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name == "index.ndjson") continue;
        // find the file holding the victim notification
        std::ifstream in(entry.path());
        std::string body((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        if (body.find(victim.notification_id) != std::string::npos) {
            std::filesystem::remove(entry.path());
            removed = true;
            break;
        }
    }
    REQUIRE(removed);
    auto issues = harness::verify_storage(report.planned, report.storage_dir);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == "missing");
    CHECK(issues[0].notification_id == victim.notification_id);
    CHECK(issues[0].inbox_url == victim.inbox_url);
    (void)items;
}

TEST_CASE("fixture generator is deterministic and spreads hosts") {
    TempDir tmp;
    auto a = tmp.path() / "a.json";
    auto b = tmp.path() / "b.json";
    harness::write_synthetic_fixture(a, 50, 20, 42);
    harness::write_synthetic_fixture(b, 50, 20, 42);
    std::ifstream fa(a), fb(b);
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ca == cb);
    CHECK(harness::fixture_hosts(a).size() == 20);
}

TEST_CASE("multiple institutions run against one proxy network") {
    TempDir tmp;
    auto f1 = tmp.path() / "one.json";
    auto f2 = tmp.path() / "two.json";
    harness::write_synthetic_fixture(f1, 4, 2, 11);
    harness::write_synthetic_fixture(f2, 6, 3, 12);
    harness::SimulateConfig config;
    config.workdir = tmp.path() / "run";
    config.institutions = {{"one", f1}, {"two", f2}};
    auto report = harness::simulate(config);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].delivered == 8);
    CHECK(report.rows[1].delivered == 12);
    CHECK(report.discrepancies.empty());
    CHECK(report.planned.size() == 20);

    // the human rendering carries both statistics tables
    auto text = harness::render_report(report);
    CHECK(text.find("#Artifact URLs") != std::string::npos);
    CHECK(text.find("#Sent Notifications") != std::string::npos);
    CHECK(text.find("req/sec") != std::string::npos);

    // and the machine report exists and agrees
    auto on_disk = json::parse(std::ifstream(config.workdir / "report.json"));
    CHECK(on_disk["rows"].size() == 2);
    CHECK(on_disk["rows"][0]["delivered"] == 8);
}
