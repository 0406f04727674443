// SPDX-License-Identifier: Apache-2.0

#include "valuenet/patterns.hpp"

#include "valuenet/clock.hpp"

#include <algorithm>

namespace valuenet::patterns {

std::string_view to_string(MessageClass c) {
    switch (c) {
        case MessageClass::one_way: return "OneWay";
        case MessageClass::thread_root: return "ThreadRoot";
        case MessageClass::thread_member: return "ThreadMember";
    }
    return "?";
}

std::string_view to_string(ThreadPhase p) {
    switch (p) {
        case ThreadPhase::requested: return "Requested";
        case ThreadPhase::acknowledged: return "Acknowledged";
        case ThreadPhase::rejected: return "Rejected";
        case ThreadPhase::fulfilled: return "Fulfilled";
        case ThreadPhase::withdrawn: return "Withdrawn";
    }
    return "?";
}

bool is_terminal(ThreadPhase p) {
    return p == ThreadPhase::rejected || p == ThreadPhase::fulfilled ||
           p == ThreadPhase::withdrawn;
}

MessageClass classify(const as2::Notification& n) {
    if (n.activity == as2::ActivityType::offer) return MessageClass::thread_root;
    if (n.in_reply_to) return MessageClass::thread_member;
    return MessageClass::one_way;
}

ThreadState open_thread(const as2::Notification& offer) {
    if (offer.activity != as2::ActivityType::offer) {
        throw as2::BadThreadRoot("a thread is rooted at an Offer, got " +
                                 std::string(to_name(offer.activity)));
    }
    ThreadState t;
    t.thread_id = offer.id;
    t.phase = ThreadPhase::requested;
    t.messages = {offer.id};
    t.artifact = offer.context.value_or("");
    t.requester = offer.actor;
    t.responder = offer.target;
    return t;
}

ThreadState transition(const ThreadState& t, const as2::Notification& n) {
    if (!n.in_reply_to ||
        std::find(t.messages.begin(), t.messages.end(), *n.in_reply_to) == t.messages.end()) {
        throw UnknownParent("inReplyTo '" + n.in_reply_to.value_or("<none>") +
                            "' is not a message of thread " + t.thread_id);
    }
    if (is_terminal(t.phase)) {
        throw IllegalTransition("thread " + t.thread_id + " is closed (" +
                                std::string(to_string(t.phase)) + ")");
    }

    std::optional<ThreadPhase> next;
    switch (t.phase) {
        case ThreadPhase::requested:
            if (n.activity == as2::ActivityType::accept) next = ThreadPhase::acknowledged;
            if (n.activity == as2::ActivityType::reject) next = ThreadPhase::rejected;
            if (n.activity == as2::ActivityType::undo) next = ThreadPhase::withdrawn;
            break;
        case ThreadPhase::acknowledged:
            if (n.activity == as2::ActivityType::announce) next = ThreadPhase::fulfilled;
            if (n.activity == as2::ActivityType::undo) next = ThreadPhase::withdrawn;
            break;
        default: break;
    }
    if (!next) {
        throw IllegalTransition(std::string(to_name(n.activity)) + " is not legal in phase " +
                                std::string(to_string(t.phase)));
    }

    ThreadState out = t;
    out.phase = *next;
    out.messages.push_back(n.id);
    return out;
}

const as2::AgentDescriptor& expected_responder(const ThreadState& t) {
    if (is_terminal(t.phase)) {
        throw TerminalThread("thread " + t.thread_id + " awaits no response");
    }
    // after the Offer the service owes an acknowledgement; after an Accept
    // it still owes the result
    return t.responder;
}

// --- ThreadStore --------------------------------------------------------------

ThreadStore::ThreadStore(std::filesystem::path journal_path)
    : journal_(std::make_unique<EventLog>(std::move(journal_path))) {}

void ThreadStore::journal(const ThreadState& state, const std::string& notification_id) {
    if (!journal_) return;
    journal_->append({{"kind", "thread-transition"},
                      {"thread_id", state.thread_id},
                      {"notification_id", notification_id},
                      {"new_state", std::string(to_string(state.phase))},
                      {"at", clock::iso8601_utc_now()}});
}

std::optional<ThreadState> ThreadStore::ingest(const as2::Notification& n) {
    switch (classify(n)) {
        case MessageClass::one_way:
            return std::nullopt;
        case MessageClass::thread_root: {
            auto entry = std::make_shared<Entry>();
            entry->state = open_thread(n);
            {
                std::unique_lock lock(map_mu_);
                auto [it, inserted] = threads_.emplace(n.id, entry);
                if (!inserted) {
                    throw as2::BadThreadRoot("thread " + n.id + " already exists");
                }
                member_index_[n.id] = n.id;
            }
            journal(entry->state, n.id);
            return entry->state;
        }
        case MessageClass::thread_member: {
            std::shared_ptr<Entry> entry;
            {
                std::shared_lock lock(map_mu_);
                auto member = member_index_.find(*n.in_reply_to);
                if (member == member_index_.end()) {
                    throw UnknownParent("inReplyTo '" + *n.in_reply_to +
                                        "' belongs to no known thread");
                }
                entry = threads_.at(member->second);
            }
            ThreadState after;
            {
                std::lock_guard lock(entry->mu);  // single writer per thread
                after = transition(entry->state, n);
                entry->state = after;
            }
            {
                std::unique_lock lock(map_mu_);
                member_index_[n.id] = after.thread_id;
            }
            journal(after, n.id);
            return after;
        }
    }
    return std::nullopt;
}

std::optional<ThreadState> ThreadStore::find(const std::string& thread_id) const {
    std::shared_lock lock(map_mu_);
    auto it = threads_.find(thread_id);
    if (it == threads_.end()) return std::nullopt;
    std::lock_guard entry_lock(it->second->mu);
    return it->second->state;
}

std::size_t ThreadStore::size() const {
    std::shared_lock lock(map_mu_);
    return threads_.size();
}

}  // namespace valuenet::patterns
