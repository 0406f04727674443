// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/discovery.hpp"
#include "valuenet/serialization.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace valuenet::delivery {

/// HTTP status on success, a transport-error tag otherwise.
struct SendStatus {
    int http = 0;                  // 0 when the request never completed
    std::string transport_error;   // "timeout", "connection_failed", ...

    bool success() const { return http == 200 || http == 201; }
    std::string text() const { return http > 0 ? std::to_string(http) : transport_error; }
    bool operator==(const SendStatus&) const = default;
};

struct DeliveryReceipt {
    std::string notification_id;
    std::string inbox_url;
    int attempt = 1;  // 1-based; the receipt of attempt N is final iff no retry followed
    SendStatus status;
    std::optional<std::string> location;  // present on 200/201
    std::string sent_at;                  // UTC timestamp of the attempt
    std::chrono::milliseconds latency{0};
};

/// One queued notification: the payload travels as serialized bytes so that
/// retries and replays are byte-identical to the original send.
struct PlanItem {
    std::string notification_id;
    wire::WireDocument document;
    std::string inbox_url;

    bool operator==(const PlanItem&) const = default;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};  // doubled per attempt, jittered
};

struct SendPlan {
    std::vector<PlanItem> items;
    int concurrency = 4;
    RetryPolicy retry;
    std::optional<double> rate_limit;  // requests per second, all workers combined
};

struct RunStats {
    std::size_t total = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::chrono::milliseconds wall{0};
    double req_per_sec = 0.0;  // 0 when the plan was empty
};

struct SendOutcome {
    std::vector<DeliveryReceipt> receipts;  // final receipt per item, plan order
    RunStats stats;
};

class Sender {
public:
    struct Options {
        std::optional<std::filesystem::path> journal;  // receipt event-log file
        std::chrono::seconds request_timeout{30};
        discovery::HostOverride host_override;
    };

    Sender() = default;
    explicit Sender(Options options);

    /// Push every plan item, retrying per policy. Returns one final receipt
    /// per item; every attempt (including retried ones) is journaled.
    SendOutcome send_all(const SendPlan& plan);

private:
    Options options_;
};

/// Plan containing only the items whose final receipt was not 200/201,
/// payloads byte-identical to the original plan.
SendPlan replay_failures(const std::vector<DeliveryReceipt>& receipts, const SendPlan& plan);

/// Serialize notifications once into a plan (JSON-LD bodies).
SendPlan make_plan(const std::vector<std::pair<as2::Notification, std::string>>& items,
                   int concurrency = 4, RetryPolicy retry = {},
                   std::optional<double> rate_limit = std::nullopt);

}  // namespace valuenet::delivery
