// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "valuenet/patterns.hpp"

#include <set>
#include <thread>

using namespace valuenet;
using namespace valuenet::testing;

namespace {

struct Fixture {
    std::mt19937 rng{7};
    as2::AgentDescriptor data_node = random_agent(rng);
    as2::AgentDescriptor service_node = random_agent(rng);
    std::string artifact = random_http_iri(rng);

    as2::Notification offer() {
        return as2::build_offer(data_node, std::nullopt, artifact, random_http_iri(rng),
                                service_node);
    }
    as2::Notification reply(as2::ActivityType kind, const as2::Notification& to) {
        if (kind == as2::ActivityType::announce) {
            as2::RelationshipObject rel;
            rel.subject = to.context.value_or(artifact);
            rel.relationship = random_http_iri(rng);
            rel.object = random_http_iri(rng);
            return as2::build_response(kind, to, service_node, std::nullopt, rel);
        }
        return as2::build_response(kind, to, service_node, std::nullopt);
    }
};

/// Independent encoding of the conversation rules, used as the enumeration
/// oracle: a plain lookup keyed by (phase, activity), written directly from
/// the acknowledged/rejected/fulfilled/withdrawn rules with terminal
/// absorption.
std::optional<patterns::ThreadPhase> oracle_next(patterns::ThreadPhase phase,
                                                 as2::ActivityType activity) {
    using P = patterns::ThreadPhase;
    using A = as2::ActivityType;
    if (phase == P::rejected || phase == P::fulfilled || phase == P::withdrawn) {
        return std::nullopt;
    }
    if (phase == P::requested && activity == A::accept) return P::acknowledged;
    if (phase == P::requested && activity == A::reject) return P::rejected;
    if (phase == P::requested && activity == A::undo) return P::withdrawn;
    if (phase == P::acknowledged && activity == A::announce) return P::fulfilled;
    if (phase == P::acknowledged && activity == A::undo) return P::withdrawn;
    return std::nullopt;
}

}  // namespace

TEST_CASE("classification of the three message classes") {
    Fixture f;
    auto offer = f.offer();
    CHECK(patterns::classify(offer) == patterns::MessageClass::thread_root);

    auto announce = as2::build_announce(
        f.service_node, std::nullopt, f.artifact,
        as2::RelationshipObject{"", f.artifact, random_http_iri(f.rng), random_http_iri(f.rng)},
        f.data_node);
    CHECK(patterns::classify(announce) == patterns::MessageClass::one_way);

    auto accept = f.reply(as2::ActivityType::accept, offer);
    CHECK(patterns::classify(accept) == patterns::MessageClass::thread_member);

    // a thread-closing result is a member, not a one-way message
    auto ack = patterns::transition(patterns::open_thread(offer), accept);
    auto closing = f.reply(as2::ActivityType::announce, accept);
    CHECK(patterns::classify(closing) == patterns::MessageClass::thread_member);
    CHECK(patterns::transition(ack, closing).phase == patterns::ThreadPhase::fulfilled);
}

TEST_CASE("the documented transitions hold") {
    Fixture f;
    auto offer = f.offer();
    auto t = patterns::open_thread(offer);
    CHECK(t.phase == patterns::ThreadPhase::requested);
    CHECK(t.artifact == f.artifact);
    CHECK(t.messages == std::vector<std::string>{offer.id});

    SUBCASE("request -> accept -> acknowledged") {
        auto after = patterns::transition(t, f.reply(as2::ActivityType::accept, offer));
        CHECK(after.phase == patterns::ThreadPhase::acknowledged);
        CHECK(after.messages.size() == 2);
        CHECK(t.messages.size() == 1);  // transition is pure
    }
    SUBCASE("request -> reject is terminal") {
        auto after = patterns::transition(t, f.reply(as2::ActivityType::reject, offer));
        CHECK(after.phase == patterns::ThreadPhase::rejected);
        CHECK_THROWS_AS(
            patterns::transition(after, f.reply(as2::ActivityType::announce, offer)),
            patterns::IllegalTransition);
    }
    SUBCASE("a result before acknowledgement is illegal") {
        CHECK_THROWS_AS(patterns::transition(t, f.reply(as2::ActivityType::announce, offer)),
                        patterns::IllegalTransition);
    }
    SUBCASE("unknown parent is its own error") {
        auto stray = f.reply(as2::ActivityType::accept, f.offer());
        CHECK_THROWS_AS(patterns::transition(t, stray), patterns::UnknownParent);
    }
}

TEST_CASE("expected responder is the service until the thread closes") {
    Fixture f;
    auto offer = f.offer();
    auto t = patterns::open_thread(offer);
    CHECK(patterns::expected_responder(t).id == f.service_node.id);
    auto acked = patterns::transition(t, f.reply(as2::ActivityType::accept, offer));
    CHECK(patterns::expected_responder(acked).id == f.service_node.id);
    auto done = patterns::transition(acked, f.reply(as2::ActivityType::announce, offer));
    CHECK_THROWS_AS(patterns::expected_responder(done), patterns::TerminalThread);
}

TEST_CASE("exhaustive sequences up to length 4 match the enumeration oracle") {
    using A = as2::ActivityType;
    const A verbs[] = {A::offer, A::accept, A::reject, A::undo, A::announce};

    std::size_t checked = 0;
    for (int length = 1; length <= 4; ++length) {
        std::vector<int> digits(static_cast<std::size_t>(length), 0);
        while (true) {
            // drive both the implementation and the oracle over the sequence
            Fixture f;
            auto offer = f.offer();
            std::optional<patterns::ThreadState> state;
            std::optional<patterns::ThreadPhase> oracle_phase;
            bool impl_alive = true, oracle_alive = true;

            for (int i = 0; i < length; ++i) {
                A verb = verbs[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
                // implementation
                if (impl_alive) {
                    try {
                        if (!state) {
                            if (verb == A::offer) {
                                state = patterns::open_thread(offer);
                            } else {
                                impl_alive = false;  // no thread to act on
                            }
                        } else if (verb == A::offer) {
                            impl_alive = false;  // a second root is not a transition
                        } else {
                            state = patterns::transition(*state, f.reply(verb, offer));
                        }
                    } catch (const patterns::TransitionError&) {
                        impl_alive = false;
                    } catch (const as2::BuildError&) {
                        impl_alive = false;
                    }
                }
                // oracle
                if (oracle_alive) {
                    if (!oracle_phase) {
                        if (verb == A::offer) {
                            oracle_phase = patterns::ThreadPhase::requested;
                        } else {
                            oracle_alive = false;
                        }
                    } else if (verb == A::offer) {
                        oracle_alive = false;
                    } else if (auto next = oracle_next(*oracle_phase, verb)) {
                        oracle_phase = next;
                    } else {
                        oracle_alive = false;
                    }
                }
            }

            CAPTURE(length);
            CAPTURE(digits[0]);
            CHECK(impl_alive == oracle_alive);
            CHECK(state.has_value() == oracle_phase.has_value());
            if (state && oracle_phase && impl_alive) CHECK(state->phase == *oracle_phase);
            ++checked;

            // odometer over the verb alphabet
            int d = length - 1;
            while (d >= 0 && ++digits[static_cast<std::size_t>(d)] == 5) {
                digits[static_cast<std::size_t>(d)] = 0;
                --d;
            }
            if (d < 0) break;
        }
    }
    CHECK(checked == 5 + 25 + 125 + 625);
}

TEST_CASE("accepted sequences never revisit a phase and terminals absorb") {
    using A = as2::ActivityType;
    const A verbs[] = {A::accept, A::reject, A::undo, A::announce};
    std::mt19937 rng(3);
    for (int round = 0; round < 200; ++round) {
        Fixture f;
        auto offer = f.offer();
        auto state = patterns::open_thread(offer);
        std::set<patterns::ThreadPhase> seen{state.phase};
        bool terminal_seen = false;
        for (int step = 0; step < 6; ++step) {
            A verb = verbs[std::uniform_int_distribution<int>(0, 3)(rng)];
            try {
                state = patterns::transition(state, f.reply(verb, offer));
                CHECK_FALSE(terminal_seen);  // nothing moves after a terminal
                CHECK(seen.insert(state.phase).second);
                terminal_seen = patterns::is_terminal(state.phase);
            } catch (const patterns::TransitionError&) {
            }
        }
    }
}

TEST_CASE("thread store serializes per thread and journals transitions") {
    TempDir tmp;
    auto journal = tmp.path() / "threads.ndjson";
    patterns::ThreadStore store(journal);

    Fixture f;
    auto offer = f.offer();
    CHECK_FALSE(store.ingest(as2::build_announce(
        f.service_node, std::nullopt, f.artifact,
        as2::RelationshipObject{"", f.artifact, random_http_iri(f.rng), random_http_iri(f.rng)},
        f.data_node)));  // one-way: no thread

    auto rooted = store.ingest(offer);
    REQUIRE(rooted);
    auto accept = f.reply(as2::ActivityType::accept, offer);
    auto acked = store.ingest(accept);
    REQUIRE(acked);
    CHECK(acked->phase == patterns::ThreadPhase::acknowledged);

    // replying to the accept (not the root) still finds the thread
    auto closing = f.reply(as2::ActivityType::announce, accept);
    auto done = store.ingest(closing);
    REQUIRE(done);
    CHECK(done->phase == patterns::ThreadPhase::fulfilled);
    CHECK(store.find(offer.id)->messages.size() == 3);

    auto lines = EventLog::read_all(journal);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0]["new_state"] == "Requested");
    CHECK(lines[1]["new_state"] == "Acknowledged");
    CHECK(lines[2]["new_state"] == "Fulfilled");
    CHECK(lines[2]["thread_id"] == offer.id);

    // parallel threads advance independently
    patterns::ThreadStore parallel;
    std::vector<as2::Notification> offers;
    for (int i = 0; i < 16; ++i) offers.push_back(f.offer());
    for (const auto& o : offers) parallel.ingest(o);
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < offers.size(); i += 4) {
                Fixture local;
                auto reply = as2::build_response(as2::ActivityType::accept, offers[i],
                                                 local.service_node, std::nullopt);
                parallel.ingest(reply);
            }
        });
    }
    for (auto& wkr : workers) wkr.join();
    CHECK(parallel.size() == offers.size());
    for (const auto& o : offers) {
        CHECK(parallel.find(o.id)->phase == patterns::ThreadPhase::acknowledged);
    }
}
