// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/as2_model.hpp"
#include "valuenet/event_log.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace valuenet::patterns {

/// How a notification participates in the two communication patterns.
enum class MessageClass { one_way, thread_root, thread_member };

std::string_view to_string(MessageClass c);

/// OneWay: unsolicited Announce/Create/Update/Remove. ThreadRoot: an Offer
/// opening a request-response conversation. ThreadMember: any reply.
MessageClass classify(const as2::Notification& n);

enum class ThreadPhase { requested, acknowledged, rejected, fulfilled, withdrawn };

std::string_view to_string(ThreadPhase p);
bool is_terminal(ThreadPhase p);

/// One request-response conversation, rooted at an Offer.
struct ThreadState {
    std::string thread_id;  // id of the root Offer
    ThreadPhase phase = ThreadPhase::requested;
    std::vector<std::string> messages;  // notification ids, arrival order
    std::string artifact;               // the Offer's context
    as2::AgentDescriptor requester;     // the Offer's actor (data node side)
    as2::AgentDescriptor responder;     // the Offer's target (service node side)

    bool operator==(const ThreadState&) const = default;
};

class TransitionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The reply's activity is not legal in the thread's current phase.
class IllegalTransition : public TransitionError {
public:
    using TransitionError::TransitionError;
};

/// in_reply_to does not reference a message of this thread.
class UnknownParent : public TransitionError {
public:
    using TransitionError::TransitionError;
};

/// The thread already reached Rejected, Withdrawn or Fulfilled.
class TerminalThread : public TransitionError {
public:
    using TransitionError::TransitionError;
};

/// Root a new thread from an Offer. Throws BadThreadRoot for anything else.
ThreadState open_thread(const as2::Notification& offer);

/// Apply one reply. Transition table:
///   Requested    + Accept   -> Acknowledged
///   Requested    + Reject   -> Rejected
///   Acknowledged + Announce -> Fulfilled
///   Requested    + Undo     -> Withdrawn
///   Acknowledged + Undo     -> Withdrawn
/// Terminal phases absorb: any further message raises IllegalTransition.
/// Pure: returns the successor state, `t` is unchanged.
ThreadState transition(const ThreadState& t, const as2::Notification& n);

/// The agent whose message is awaited. After the Offer and after an Accept
/// that is the service node; the data node stays passive.
const as2::AgentDescriptor& expected_responder(const ThreadState& t);

/// Keeps live threads, serializing transitions per thread while independent
/// threads proceed in parallel. Optionally journals every accepted
/// transition as an event-log line.
class ThreadStore {
public:
    ThreadStore() = default;
    explicit ThreadStore(std::filesystem::path journal_path);

    /// Route a notification: Offers open threads, members transition the
    /// thread their in_reply_to belongs to. Returns the state after the
    /// message, or nullopt for one-way messages.
    std::optional<ThreadState> ingest(const as2::Notification& n);

    std::optional<ThreadState> find(const std::string& thread_id) const;
    std::size_t size() const;

private:
    struct Entry {
        std::mutex mu;
        ThreadState state;
    };

    void journal(const ThreadState& state, const std::string& notification_id);

    mutable std::shared_mutex map_mu_;
    std::map<std::string, std::shared_ptr<Entry>> threads_;
    std::map<std::string, std::string> member_index_;  // notification id -> thread id
    std::unique_ptr<EventLog> journal_;
};

}  // namespace valuenet::patterns
