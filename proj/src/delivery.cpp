// SPDX-License-Identifier: Apache-2.0

#include "valuenet/delivery.hpp"

#include "valuenet/clock.hpp"
#include "valuenet/event_log.hpp"
#include "valuenet/iri.hpp"

#include <httplib.h>

#include <atomic>
#include <mutex>
#include <random>
#include <thread>

namespace valuenet::delivery {

namespace {

/// Paces acquisitions so that intervals never undercut 1/rate seconds.
class RateLimiter {
public:
    explicit RateLimiter(double rate_per_sec)
        : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
              std::chrono::duration<double>(1.0 / rate_per_sec))) {}

    void acquire() {
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(mu_);
            auto now = std::chrono::steady_clock::now();
            slot = next_ < now ? now : next_;
            next_ = slot + interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_ = std::chrono::steady_clock::now();
    std::mutex mu_;
};

struct Target {
    std::string client_url;  // scheme://connect_host:connect_port
    std::string host_header;
    std::string path;
};

std::optional<Target> target_for(const std::string& inbox_url,
                                 const discovery::HostOverride& override_fn) {
    auto c = iri::split(inbox_url);
    if (!c || !c->has_authority || (c->scheme != "http" && c->scheme != "https")) {
        return std::nullopt;
    }
    std::string auth = c->authority;
    auto at = auth.find('@');
    if (at != std::string::npos) auth.erase(0, at + 1);
    std::string host = auth;
    int port = c->scheme == "https" ? 443 : 80;
    auto bracket = auth.rfind(']');
    auto colon = auth.rfind(':');
    if (colon != std::string::npos && (bracket == std::string::npos || colon > bracket)) {
        host = auth.substr(0, colon);
        try {
            port = std::stoi(auth.substr(colon + 1));
        } catch (...) {
            return std::nullopt;
        }
    }
    std::string scheme = c->scheme;
    std::string connect_host = host;
    int connect_port = port;
    if (override_fn) {
        if (auto mapped = override_fn(host, port)) {
            connect_host = mapped->first;
            connect_port = mapped->second;
            scheme = "http";
        }
    }
    Target t;
    t.client_url = scheme + "://" + connect_host + ":" + std::to_string(connect_port);
    t.host_header = auth;
    t.path = c->path.empty() ? "/" : c->path;
    if (c->has_query) t.path += "?" + c->query;
    return t;
}

std::chrono::milliseconds jittered_backoff(const RetryPolicy& retry, int attempt,
                                           std::mt19937_64& rng) {
    auto base = retry.backoff_base.count() * (1LL << (attempt - 1));
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    return std::chrono::milliseconds(static_cast<long long>(base * jitter(rng)));
}

bool retryable(const SendStatus& status) {
    if (status.http == 0) return true;        // transport failure
    return status.http >= 500;                // server-side; 4xx is permanent
}

}  // namespace

Sender::Sender(Options options) : options_(std::move(options)) {}

SendOutcome Sender::send_all(const SendPlan& plan) {
    SendOutcome outcome;
    outcome.receipts.resize(plan.items.size());
    outcome.stats.total = plan.items.size();

    std::unique_ptr<EventLog> journal;
    if (options_.journal) journal = std::make_unique<EventLog>(*options_.journal);
    auto journal_receipt = [&](const DeliveryReceipt& r, bool final) {
        if (!journal) return;
        journal->append({{"kind", "delivery-receipt"},
                         {"notification_id", r.notification_id},
                         {"inbox_url", r.inbox_url},
                         {"attempt", r.attempt},
                         {"status", r.status.text()},
                         {"location", r.location.value_or("")},
                         {"sent_at", r.sent_at},
                         {"latency_ms", r.latency.count()},
                         {"final", final}});
    };

    std::optional<RateLimiter> limiter;
    if (plan.rate_limit && *plan.rate_limit > 0) limiter.emplace(*plan.rate_limit);

    const auto started = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    const int workers =
        std::max(1, std::min<int>(plan.concurrency, static_cast<int>(plan.items.size())));

    auto worker = [&] {
        std::mt19937_64 rng{std::random_device{}()};
        // connection reuse per worker and per target
        std::map<std::string, std::unique_ptr<httplib::Client>> clients;
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= plan.items.size()) return;
            const PlanItem& item = plan.items[i];

            DeliveryReceipt receipt;
            receipt.notification_id = item.notification_id;
            receipt.inbox_url = item.inbox_url;

            auto target = target_for(item.inbox_url, options_.host_override);
            for (int attempt = 1; attempt <= std::max(1, plan.retry.max_attempts); ++attempt) {
                receipt.attempt = attempt;
                receipt.location.reset();
                receipt.status = {};
                if (limiter) limiter->acquire();
                receipt.sent_at = clock::iso8601_utc_now();
                const auto t0 = std::chrono::steady_clock::now();

                if (!target) {
                    receipt.status = SendStatus{0, "bad_inbox_url"};
                } else {
                    auto& client = clients[target->client_url];
                    if (!client) {
                        client = std::make_unique<httplib::Client>(target->client_url);
                        client->set_connection_timeout(options_.request_timeout);
                        client->set_read_timeout(options_.request_timeout);
                    }
                    httplib::Headers headers{{"Host", target->host_header}};
                    auto response = client->Post(target->path, headers, item.document.body,
                                                 item.document.media_type);
                    if (!response) {
                        receipt.status =
                            SendStatus{0, response.error() == httplib::Error::ConnectionTimeout
                                              ? "timeout"
                                              : "connection_failed"};
                    } else {
                        receipt.status = SendStatus{response->status, ""};
                        if (response->has_header("Location")) {
                            receipt.location =
                                iri::resolve(item.inbox_url, response->get_header_value("Location"));
                        }
                    }
                }
                receipt.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0);

                const bool final =
                    receipt.status.success() || !retryable(receipt.status) ||
                    attempt == std::max(1, plan.retry.max_attempts);
                journal_receipt(receipt, final);
                if (final) break;
                std::this_thread::sleep_for(jittered_backoff(plan.retry, attempt, rng));
            }
            outcome.receipts[i] = receipt;
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    outcome.stats.wall = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    for (const auto& r : outcome.receipts) {
        if (r.status.success()) {
            ++outcome.stats.succeeded;
        } else {
            ++outcome.stats.failed;
        }
    }
    if (outcome.stats.total > 0 && outcome.stats.wall.count() > 0) {
        outcome.stats.req_per_sec = static_cast<double>(outcome.stats.total) /
                                    (static_cast<double>(outcome.stats.wall.count()) / 1000.0);
    }
    return outcome;
}

SendPlan replay_failures(const std::vector<DeliveryReceipt>& receipts, const SendPlan& plan) {
    SendPlan out;
    out.concurrency = plan.concurrency;
    out.retry = plan.retry;
    out.rate_limit = plan.rate_limit;
    for (const auto& receipt : receipts) {
        if (receipt.status.success()) continue;
        for (const auto& item : plan.items) {
            if (item.notification_id == receipt.notification_id &&
                item.inbox_url == receipt.inbox_url) {
                out.items.push_back(item);
                break;
            }
        }
    }
    return out;
}

SendPlan make_plan(const std::vector<std::pair<as2::Notification, std::string>>& items,
                   int concurrency, RetryPolicy retry, std::optional<double> rate_limit) {
    SendPlan plan;
    plan.concurrency = concurrency;
    plan.retry = retry;
    plan.rate_limit = rate_limit;
    plan.items.reserve(items.size());
    for (const auto& [notification, inbox_url] : items) {
        plan.items.push_back(PlanItem{notification.id,
                                      wire::serialize(notification, wire::Format::jsonld),
                                      inbox_url});
    }
    return plan;
}

}  // namespace valuenet::delivery
