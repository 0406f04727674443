// SPDX-License-Identifier: Apache-2.0

#include "valuenet/as2_model.hpp"

#include "valuenet/iri.hpp"
#include "valuenet/uuid.hpp"

#include <algorithm>
#include <array>

namespace valuenet::as2 {

namespace {

constexpr std::array<std::string_view, 8> activity_names = {
    "Announce", "Offer", "Accept", "Reject", "Undo", "Create", "Update", "Remove"};

constexpr std::array<std::string_view, 4> agent_kind_names = {"Organization", "Service", "Person",
                                                              "Application"};

const std::string as_instrument = std::string(vocab::as_ns) + "instrument";

}  // namespace

std::string_view to_name(ActivityType t) { return activity_names[static_cast<std::size_t>(t)]; }

std::string to_iri(ActivityType t) { return std::string(vocab::as_ns) + std::string(to_name(t)); }

std::optional<ActivityType> activity_from_name(std::string_view name) {
    for (std::size_t i = 0; i < activity_names.size(); ++i) {
        if (activity_names[i] == name) return static_cast<ActivityType>(i);
    }
    return std::nullopt;
}

std::optional<ActivityType> activity_from_iri(std::string_view iri) {
    if (iri.rfind(vocab::as_ns, 0) != 0) return std::nullopt;
    return activity_from_name(iri.substr(vocab::as_ns.size()));
}

std::string_view to_name(AgentKind k) { return agent_kind_names[static_cast<std::size_t>(k)]; }

std::string to_iri(AgentKind k) { return std::string(vocab::as_ns) + std::string(to_name(k)); }

std::optional<AgentKind> agent_kind_from_name(std::string_view name) {
    for (std::size_t i = 0; i < agent_kind_names.size(); ++i) {
        if (agent_kind_names[i] == name) return static_cast<AgentKind>(i);
    }
    return std::nullopt;
}

std::optional<AgentKind> agent_kind_from_iri(std::string_view iri) {
    if (iri.rfind(vocab::as_ns, 0) != 0) return std::nullopt;
    return agent_kind_from_name(iri.substr(vocab::as_ns.size()));
}

bool ValidationReport::has_error(std::string_view code) const {
    return std::any_of(errors.begin(), errors.end(),
                       [&](const Finding& f) { return f.code == code; });
}

bool ValidationReport::has_warning(std::string_view code) const {
    return std::any_of(warnings.begin(), warnings.end(),
                       [&](const Finding& f) { return f.code == code; });
}

// --- builders ----------------------------------------------------------------

namespace {

void require_absolute(const std::string& value, const char* what) {
    if (!iri::is_absolute(value)) {
        throw InvalidIri(std::string(what) + " must be an absolute IRI: '" + value + "'");
    }
}

}  // namespace

Notification build_announce(const AgentDescriptor& actor,
                            const std::optional<AgentDescriptor>& origin,
                            const std::string& artifact, const RelationshipObject& result,
                            const AgentDescriptor& target) {
    require_absolute(artifact, "artifact");
    if (result.subject != artifact) {
        throw MismatchedSubject("result.subject '" + result.subject +
                                "' does not match artifact '" + artifact + "'");
    }
    Notification n;
    n.id = uuid::urn_uuid();
    n.activity = ActivityType::announce;
    n.actor = actor;
    n.origin = origin;
    n.context = artifact;
    RelationshipObject rel = result;
    if (rel.id.empty()) rel.id = uuid::urn_uuid();
    n.object = std::move(rel);
    n.target = target;
    return n;
}

Notification build_offer(const AgentDescriptor& actor,
                         const std::optional<AgentDescriptor>& origin, const std::string& artifact,
                         const std::string& service, const AgentDescriptor& target) {
    require_absolute(artifact, "artifact");
    require_absolute(service, "service");
    Notification n;
    n.id = uuid::urn_uuid();
    n.activity = ActivityType::offer;
    n.actor = actor;
    n.origin = origin;
    n.context = artifact;
    n.object = artifact;  // by-reference request
    n.target = target;
    n.remainder.insert(rdf::Term::iri(n.id), rdf::Term::iri(as_instrument),
                       rdf::Term::iri(service));
    return n;
}

Notification build_response(ActivityType kind, const Notification& request,
                            const AgentDescriptor& actor,
                            const std::optional<AgentDescriptor>& origin,
                            const std::optional<RelationshipObject>& result) {
    if (kind == ActivityType::accept || kind == ActivityType::reject) {
        if (request.activity != ActivityType::offer) {
            throw BadThreadRoot(std::string(to_name(kind)) + " can only reply to an Offer, not " +
                                std::string(to_name(request.activity)));
        }
    }
    if (kind == ActivityType::announce && !result) {
        throw MissingResult("Announce response requires a service result");
    }

    Notification n;
    n.id = uuid::urn_uuid();
    n.activity = kind;
    n.actor = actor;
    n.origin = origin;
    n.context = request.context;
    n.in_reply_to = request.id;
    n.target = request.actor;  // direction swaps relative to the request
    if (kind == ActivityType::announce) {
        RelationshipObject rel = *result;
        if (rel.id.empty()) rel.id = uuid::urn_uuid();
        n.object = std::move(rel);
    } else {
        n.object = request.id;  // the activity being acknowledged / withdrawn
    }
    return n;
}

// --- validation --------------------------------------------------------------

namespace {

void check_agent(const AgentDescriptor& agent, const char* slot, ValidationReport& report) {
    if (agent.id.empty()) {
        report.errors.push_back({std::string(slot) + "-missing-id",
                                 std::string(slot) + " has no identifier"});
    } else if (!iri::is_http(agent.id)) {
        report.errors.push_back(
            {std::string(slot) + "-id-not-dereferenceable",
             std::string(slot) + " id is not an http(s) IRI: '" + agent.id + "'"});
    }
    if (agent.inbox && !iri::is_http(*agent.inbox)) {
        report.errors.push_back({std::string(slot) + "-inbox-not-url",
                                 std::string(slot) + " inbox is not an http(s) URL"});
    }
}

}  // namespace

ValidationReport validate_notification(const Notification& n) {
    ValidationReport report;

    if (n.id.empty() || !iri::is_absolute(n.id)) {
        report.errors.push_back({"invalid-id", "notification id must be a URN or absolute IRI"});
    }

    for (const auto& ext : n.extension_types) {
        if (activity_from_iri(ext)) {
            report.errors.push_back(
                {"duplicate-core-type", "types may contain only one core activity type"});
        } else if (ext.rfind(vocab::as_ns, 0) == 0) {
            // an as: type that is not one of the eight is a social verb or
            // another vocabulary member the profile excludes
            report.errors.push_back(
                {"activity-type-outside-profile", "activity type outside profile: " + ext});
        } else if (!iri::is_absolute(ext)) {
            report.errors.push_back(
                {"extension-type-not-iri", "extension type must be an absolute IRI: '" + ext + "'"});
        }
    }

    check_agent(n.actor, "actor", report);
    check_agent(n.target, "target", report);
    if (n.origin) {
        check_agent(*n.origin, "origin", report);
    } else {
        report.warnings.push_back({"origin-missing", "origin agent is recommended"});
    }
    if (!n.target.inbox) {
        report.warnings.push_back(
            {"target-inbox-missing", "target has no inbox; discovery must supply one"});
    }

    if (n.context && !iri::is_absolute(*n.context)) {
        report.errors.push_back({"invalid-context", "context must be an absolute IRI"});
    }

    if (const auto* rel = n.relationship_object()) {
        if (rel->id.empty() || !iri::is_absolute(rel->id)) {
            report.errors.push_back(
                {"relationship-invalid-id", "relationship id must be an IRI or URN"});
        }
        if (!iri::is_absolute(rel->subject)) {
            report.errors.push_back(
                {"relationship-invalid-subject", "relationship subject must be an absolute IRI"});
        }
        if (!iri::is_absolute(rel->relationship)) {
            report.errors.push_back(
                {"relationship-invalid-term", "relationship term must be an absolute IRI"});
        }
        if (!iri::is_absolute(rel->object)) {
            report.errors.push_back(
                {"relationship-invalid-object", "relationship object must be an absolute IRI"});
        }
        if (!rel->subject.empty() && rel->subject == rel->object) {
            report.errors.push_back(
                {"relationship-self-reference", "relationship subject equals object"});
        }
        if (n.activity == ActivityType::announce) {
            if (!n.context) {
                report.errors.push_back({"announce-context-missing",
                                         "Announce with a service result requires context"});
            } else if (*n.context != rel->subject) {
                report.errors.push_back(
                    {"announce-context-mismatch",
                     "context must equal the relationship subject (the artifact on the data node)"});
            }
        }
    } else {
        const auto& obj = std::get<std::string>(n.object);
        if (!iri::is_absolute(obj)) {
            report.errors.push_back({"invalid-object", "object must be an absolute IRI"});
        }
    }

    const bool needs_reply_link = n.activity == ActivityType::accept ||
                                  n.activity == ActivityType::reject ||
                                  n.activity == ActivityType::undo;
    if (needs_reply_link && !n.in_reply_to) {
        report.errors.push_back(
            {"missing-in-reply-to",
             std::string(to_name(n.activity)) + " must reference the notification it answers"});
    }
    if (n.in_reply_to && !iri::is_absolute(*n.in_reply_to)) {
        report.errors.push_back({"invalid-in-reply-to", "inReplyTo must be a URN or absolute IRI"});
    }

    return report;
}

}  // namespace valuenet::as2
