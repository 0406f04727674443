// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/rdf.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace valuenet::as2 {

namespace vocab {
inline constexpr std::string_view as_ns = "https://www.w3.org/ns/activitystreams#";
inline constexpr std::string_view ldp_ns = "http://www.w3.org/ns/ldp#";
inline constexpr std::string_view ldp_inbox = "http://www.w3.org/ns/ldp#inbox";
inline constexpr std::string_view as_relationship_type =
    "https://www.w3.org/ns/activitystreams#Relationship";
}  // namespace vocab

/// The profile's core activity types: value-adding conversation verbs plus
/// the CRUD life-cycle events. Social verbs (Like, Follow, ...) are outside
/// the profile and rejected by validation.
enum class ActivityType { announce, offer, accept, reject, undo, create, update, remove };

inline constexpr ActivityType all_activity_types[] = {
    ActivityType::announce, ActivityType::offer,  ActivityType::accept, ActivityType::reject,
    ActivityType::undo,     ActivityType::create, ActivityType::update, ActivityType::remove};

std::string_view to_name(ActivityType t);                           // "Announce", ...
std::string to_iri(ActivityType t);                                 // as: IRI
std::optional<ActivityType> activity_from_name(std::string_view);   // by bare name
std::optional<ActivityType> activity_from_iri(std::string_view);    // by as: IRI

enum class AgentKind { organization, service, person, application };

std::string_view to_name(AgentKind k);
std::string to_iri(AgentKind k);
std::optional<AgentKind> agent_kind_from_name(std::string_view);
std::optional<AgentKind> agent_kind_from_iri(std::string_view);

/// An agent operating on behalf of a data node or service node. The id is an
/// http(s) IRI so that peers can dereference it for further description.
struct AgentDescriptor {
    std::string id;
    std::optional<AgentKind> kind;
    std::optional<std::string> name;
    std::optional<std::string> inbox;

    bool operator==(const AgentDescriptor&) const = default;
};

/// The by-reference statement carried in as:object: subject is the artifact
/// on the addressee's node, object the related artifact or service result.
struct RelationshipObject {
    std::string id;  // IRI or urn:uuid
    std::string subject;
    std::string relationship;
    std::string object;

    bool operator==(const RelationshipObject&) const = default;
};

/// One profiled ActivityStreams 2.0 notification. Immutable value object;
/// `remainder` holds triples outside the profile mapping so that foreign
/// payloads survive a parse/serialize round trip losslessly.
struct Notification {
    std::string id;                                    // urn:uuid or IRI
    ActivityType activity = ActivityType::announce;    // the single core type
    std::vector<std::string> extension_types;          // absolute IRIs, order kept
    AgentDescriptor actor;
    std::optional<AgentDescriptor> origin;
    std::optional<std::string> context;
    std::variant<RelationshipObject, std::string> object;
    AgentDescriptor target;
    std::optional<std::string> in_reply_to;
    rdf::Graph remainder;

    bool has_relationship_object() const {
        return std::holds_alternative<RelationshipObject>(object);
    }
    const RelationshipObject* relationship_object() const {
        return std::get_if<RelationshipObject>(&object);
    }

    bool operator==(const Notification&) const = default;
};

// --- construction errors ----------------------------------------------------

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// result.subject does not match the artifact the notification is about.
class MismatchedSubject : public BuildError {
public:
    using BuildError::BuildError;
};

/// A relative or malformed IRI where an absolute one is required.
class InvalidIri : public BuildError {
public:
    using BuildError::BuildError;
};

/// kind=Announce response without a service result.
class MissingResult : public BuildError {
public:
    using BuildError::BuildError;
};

/// Accept/Reject can only answer an Offer.
class BadThreadRoot : public BuildError {
public:
    using BuildError::BuildError;
};

// --- validation --------------------------------------------------------------

struct Finding {
    std::string code;
    std::string message;
    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> errors;
    std::vector<Finding> warnings;

    bool ok() const { return errors.empty(); }
    bool has_error(std::string_view code) const;
    bool has_warning(std::string_view code) const;
};

// --- operations --------------------------------------------------------------

/// One-way announcement of a service result concerning `artifact`.
/// Requires result.subject == artifact; context is set to the artifact.
Notification build_announce(const AgentDescriptor& actor,
                            const std::optional<AgentDescriptor>& origin,
                            const std::string& artifact, const RelationshipObject& result,
                            const AgentDescriptor& target);

/// Thread-opening request asking a service node to apply the value-adding
/// service identified by `service` to `artifact`. The request travels by
/// reference: object is the artifact itself; the service IRI is recorded as
/// an activity-instrument arc.
Notification build_offer(const AgentDescriptor& actor,
                         const std::optional<AgentDescriptor>& origin, const std::string& artifact,
                         const std::string& service, const AgentDescriptor& target);

/// Reply within a thread: Accept/Reject acknowledge an Offer, Undo withdraws,
/// Announce closes the thread with a result. in_reply_to is set to the
/// request id, the addressee is the request's actor, context is copied.
Notification build_response(ActivityType kind, const Notification& request,
                            const AgentDescriptor& actor,
                            const std::optional<AgentDescriptor>& origin,
                            const std::optional<RelationshipObject>& result = std::nullopt);

/// Check every profile invariant; collects all findings instead of failing
/// fast so batch pipelines can triage. Empty error list == valid.
ValidationReport validate_notification(const Notification& n);

}  // namespace valuenet::as2
