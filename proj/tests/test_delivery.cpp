// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "valuenet/delivery.hpp"
#include "valuenet/event_log.hpp"
#include "valuenet/inbox_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

using namespace valuenet;
using namespace valuenet::testing;

namespace {

/// Inbox stand-in whose per-path behaviour is scripted: a list of statuses
/// served in order, the last repeating forever. 201 responses carry a
/// Location header.
class ScriptedInbox {
public:
    ScriptedInbox() {
        server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
            int status = 201;
            {
                std::lock_guard lock(mu_);
                ++hits_[req.path];
                auto it = scripts_.find(req.path);
                if (it != scripts_.end() && !it->second.empty()) {
                    status = it->second.front();
                    if (it->second.size() > 1) it->second.erase(it->second.begin());
                }
            }
            res.status = status;
            if (status == 201 || status == 200) {
                res.set_header("Location", "http://127.0.0.1:" + std::to_string(port_) +
                                               req.path + "/" + uuid::random_uuid());
            }
            res.set_content("scripted\n", "text/plain");
        });
    }
    ~ScriptedInbox() { stop(); }

    void script(const std::string& path, std::vector<int> statuses) {
        std::lock_guard lock(mu_);
        scripts_[path] = std::move(statuses);
    }
    int hits(const std::string& path) {
        std::lock_guard lock(mu_);
        return hits_[path];
    }
    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void stop() {
        if (server_.is_running()) server_.stop();
        if (thread_.joinable()) thread_.join();
    }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::map<std::string, std::vector<int>> scripts_;
    std::map<std::string, int> hits_;
};

delivery::SendPlan plan_of(std::vector<delivery::PlanItem> items) {
    delivery::SendPlan plan;
    plan.items = std::move(items);
    plan.concurrency = 3;
    plan.retry.max_attempts = 3;
    plan.retry.backoff_base = std::chrono::milliseconds(2);  // fast tests
    return plan;
}

delivery::PlanItem item_for(std::mt19937& rng, const std::string& inbox_url) {
    auto n = random_notification(rng);
    return {n.id, wire::serialize(n, wire::Format::jsonld), inbox_url};
}

}  // namespace

TEST_CASE("send_all delivers everything and reports stats") {
    ScriptedInbox inbox;
    inbox.start();
    std::mt19937 rng(1);
    std::vector<delivery::PlanItem> items;
    for (int i = 0; i < 20; ++i) items.push_back(item_for(rng, inbox.url("/inbox")));
    auto plan = plan_of(std::move(items));

    TempDir tmp;
    delivery::Sender sender({tmp.path() / "receipts.ndjson", std::chrono::seconds(5), nullptr});
    auto outcome = sender.send_all(plan);

    CHECK(outcome.stats.total == 20);
    CHECK(outcome.stats.succeeded == 20);
    CHECK(outcome.stats.failed == 0);
    CHECK(outcome.stats.req_per_sec > 0);
    REQUIRE(outcome.receipts.size() == 20);
    for (std::size_t i = 0; i < outcome.receipts.size(); ++i) {
        const auto& r = outcome.receipts[i];
        CHECK(r.notification_id == plan.items[i].notification_id);  // plan order kept
        CHECK(r.status.http == 201);
        CHECK(r.attempt == 1);
        REQUIRE(r.location.has_value());
        CHECK(r.location->rfind("http://", 0) == 0);
    }
    auto journal = EventLog::read_all(tmp.path() / "receipts.ndjson");
    CHECK(journal.size() == 20);
    CHECK(journal.front()["kind"] == "delivery-receipt");
}

TEST_CASE("empty plan: zero receipts, req/sec reported as 0") {
    delivery::Sender sender;
    auto outcome = sender.send_all(plan_of({}));
    CHECK(outcome.receipts.empty());
    CHECK(outcome.stats.total == 0);
    CHECK(outcome.stats.req_per_sec == 0.0);
}

TEST_CASE("5xx retries until success; receipts record the attempt count") {
    ScriptedInbox inbox;
    inbox.start();
    inbox.script("/flaky", {500, 500, 201});
    std::mt19937 rng(2);
    auto plan = plan_of({item_for(rng, inbox.url("/flaky"))});

    TempDir tmp;
    delivery::Sender sender({tmp.path() / "r.ndjson", std::chrono::seconds(5), nullptr});
    auto outcome = sender.send_all(plan);
    REQUIRE(outcome.receipts.size() == 1);
    CHECK(outcome.receipts[0].status.http == 201);
    CHECK(outcome.receipts[0].attempt == 3);
    CHECK(inbox.hits("/flaky") == 3);

    // every attempt was journaled, the last marked final
    auto journal = EventLog::read_all(tmp.path() / "r.ndjson");
    REQUIRE(journal.size() == 3);
    CHECK(journal[0]["final"] == false);
    CHECK(journal[2]["final"] == true);
    CHECK(journal[2]["attempt"] == 3);
}

TEST_CASE("4xx is permanent: no retry") {
    ScriptedInbox inbox;
    inbox.start();
    inbox.script("/reject", {422});
    std::mt19937 rng(3);
    delivery::Sender sender;
    auto outcome = sender.send_all(plan_of({item_for(rng, inbox.url("/reject"))}));
    CHECK(outcome.receipts[0].status.http == 422);
    CHECK(outcome.receipts[0].attempt == 1);
    CHECK(outcome.stats.failed == 1);
    CHECK(inbox.hits("/reject") == 1);
}

TEST_CASE("unreachable inboxes yield transport-error receipts") {
    std::mt19937 rng(4);
    auto plan = plan_of({item_for(rng, "http://127.0.0.1:1/inbox")});
    plan.retry.max_attempts = 2;
    delivery::Sender sender;
    auto outcome = sender.send_all(plan);
    REQUIRE(outcome.receipts.size() == 1);
    CHECK(outcome.receipts[0].status.http == 0);
    CHECK_FALSE(outcome.receipts[0].status.transport_error.empty());
    CHECK(outcome.receipts[0].attempt == 2);
    CHECK(outcome.stats.failed == 1);
}

TEST_CASE("replay_failures keeps exactly the failed payloads, byte-identical") {
    ScriptedInbox inbox;
    inbox.start();
    inbox.script("/dead", {503, 503, 503});
    std::mt19937 rng(5);
    std::vector<delivery::PlanItem> items;
    for (int i = 0; i < 7; ++i) items.push_back(item_for(rng, inbox.url("/inbox")));
    for (int i = 0; i < 3; ++i) items.push_back(item_for(rng, inbox.url("/dead")));
    auto plan = plan_of(std::move(items));

    delivery::Sender sender;
    auto outcome = sender.send_all(plan);
    CHECK(outcome.stats.succeeded == 7);
    CHECK(outcome.stats.failed == 3);

    auto replay = delivery::replay_failures(outcome.receipts, plan);
    REQUIRE(replay.items.size() == 3);
    for (const auto& item : replay.items) {
        CHECK(item.inbox_url == inbox.url("/dead"));
        auto original = std::find(plan.items.begin(), plan.items.end(), item);
        CHECK(original != plan.items.end());  // byte-identical payload
    }

    SUBCASE("after recovery the replay drains to zero failures") {
        inbox.script("/dead", {201});
        auto second = sender.send_all(replay);
        CHECK(second.stats.failed == 0);
        CHECK(delivery::replay_failures(second.receipts, replay).items.empty());
    }
    SUBCASE("all-success replay is empty") {
        auto none = delivery::replay_failures(outcome.receipts, plan);
        ScriptedInbox fresh;
        fresh.start();
        std::vector<delivery::PlanItem> ok_items;
        std::mt19937 rng2(6);
        for (int i = 0; i < 3; ++i) ok_items.push_back(item_for(rng2, fresh.url("/inbox")));
        auto ok_outcome = sender.send_all(plan_of(std::move(ok_items)));
        CHECK(delivery::replay_failures(ok_outcome.receipts, plan_of({})).items.empty());
        (void)none;
    }
}

TEST_CASE("duplicate sends never inflate a real inbox: joint idempotency") {
    TempDir tmp;
    inbox::InboxConfig config;
    config.storage_dir = tmp.path() / "storage";
    config.inbox_paths = {"/inbox"};
    inbox::InboxServer server(std::move(config));
    server.start();

    std::mt19937 rng(7);
    std::vector<delivery::PlanItem> items;
    auto base = "http://127.0.0.1:" + std::to_string(server.port());
    for (int i = 0; i < 5; ++i) items.push_back(item_for(rng, base + "/inbox"));
    auto plan = plan_of(std::move(items));
    // send the same plan twice: at-least-once delivery with retries
    delivery::Sender sender;
    auto first = sender.send_all(plan);
    auto second = sender.send_all(plan);
    CHECK(first.stats.succeeded == 5);
    CHECK(second.stats.succeeded == 5);  // duplicates answer 200
    for (const auto& r : second.receipts) CHECK(r.status.http == 200);
    CHECK(server.stored_count("/inbox") == 5);
    server.stop();
}

TEST_CASE("the rate limiter paces the batch") {
    ScriptedInbox inbox;
    inbox.start();
    std::mt19937 rng(8);
    std::vector<delivery::PlanItem> items;
    for (int i = 0; i < 30; ++i) items.push_back(item_for(rng, inbox.url("/inbox")));
    auto plan = plan_of(std::move(items));
    plan.concurrency = 8;
    plan.rate_limit = 60.0;  // 30 requests should need ~0.5 s

    delivery::Sender sender;
    auto started = std::chrono::steady_clock::now();
    auto outcome = sender.send_all(plan);
    auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    CHECK(outcome.stats.succeeded == 30);
    // pacing guarantees intervals of 1/60 s: 30 requests take at least 29/60 s
    CHECK(wall >= 29.0 / 60.0);
    // and the observed rate stays within 5% of the cap (one free slot at start)
    double observed = 30.0 / wall;
    CHECK(observed <= 60.0 * 1.05 + 2.0);
}
