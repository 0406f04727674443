// SPDX-License-Identifier: Apache-2.0

#include "valuenet/serialization.hpp"

#include "valuenet/iri.hpp"
#include "valuenet/uuid.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace valuenet::wire {

using nlohmann::json;
using rdf::Graph;
using rdf::Term;
using rdf::Triple;

namespace {

const std::string AS = std::string(as2::vocab::as_ns);
const std::string LDP_INBOX = std::string(as2::vocab::ldp_inbox);
constexpr std::string_view as_context_iri = "https://www.w3.org/ns/activitystreams";

// Pinned compaction profile: the subset of the published ActivityStreams
// context this profile uses. Terms resolve locally; the context document is
// never fetched.
struct TermDef {
    std::string iri;
    bool id_coerced;  // string values are IRIs rather than literals
};

const std::map<std::string, TermDef>& context_terms() {
    static const std::map<std::string, TermDef> defs = {
        {"actor", {AS + "actor", true}},
        {"origin", {AS + "origin", true}},
        {"context", {AS + "context", true}},
        {"object", {AS + "object", true}},
        {"target", {AS + "target", true}},
        {"inReplyTo", {AS + "inReplyTo", true}},
        {"subject", {AS + "subject", true}},
        {"relationship", {AS + "relationship", true}},
        {"instrument", {AS + "instrument", true}},
        {"name", {AS + "name", false}},
        {"inbox", {LDP_INBOX, true}},
    };
    return defs;
}

std::optional<std::string> compact_key_for(const std::string& predicate_iri) {
    for (const auto& [term, def] : context_terms()) {
        if (def.iri == predicate_iri) return term;
    }
    return std::nullopt;
}

// Type names (Announce, Organization, Relationship, ...) map into the as:
// namespace; anything else must appear as an absolute IRI.
std::string expand_type(const std::string& value) {
    if (iri::is_absolute(value)) return value;
    return AS + value;
}

std::string compact_type(const std::string& type_iri) {
    if (type_iri.rfind(AS, 0) == 0) {
        std::string local = type_iri.substr(AS.size());
        bool clean = !local.empty() && std::all_of(local.begin(), local.end(), [](unsigned char c) {
            return std::isalnum(c) != 0;
        });
        if (clean) return local;
    }
    return type_iri;
}

}  // namespace

std::string_view media_type_of(Format f) {
    return f == Format::jsonld ? media_jsonld : media_turtle;
}

std::optional<Format> format_for_media_type(std::string_view content_type) {
    auto semi = content_type.find(';');
    std::string_view bare = content_type.substr(0, semi);
    while (!bare.empty() && (bare.back() == ' ' || bare.back() == '\t')) bare.remove_suffix(1);
    while (!bare.empty() && (bare.front() == ' ' || bare.front() == '\t')) bare.remove_prefix(1);
    std::string lowered(bare);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == media_jsonld) return Format::jsonld;
    if (lowered == media_turtle) return Format::turtle;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Notification -> graph
// ---------------------------------------------------------------------------

namespace {

void agent_to_graph(const as2::AgentDescriptor& agent, Graph& g) {
    Term node = Term::iri(agent.id);
    if (agent.kind) g.insert(node, Term::iri(std::string(rdf::rdf_type)), Term::iri(to_iri(*agent.kind)));
    if (agent.inbox) g.insert(node, Term::iri(LDP_INBOX), Term::iri(*agent.inbox));
    if (agent.name) g.insert(node, Term::iri(AS + "name"), Term::literal(*agent.name));
}

}  // namespace

Graph to_graph(const as2::Notification& n) {
    Graph g;
    Term root = Term::iri(n.id);
    Term a = Term::iri(std::string(rdf::rdf_type));

    g.insert(root, a, Term::iri(to_iri(n.activity)));
    for (const auto& ext : n.extension_types) g.insert(root, a, Term::iri(ext));
    g.insert(root, Term::iri(AS + "actor"), Term::iri(n.actor.id));
    if (n.origin) g.insert(root, Term::iri(AS + "origin"), Term::iri(n.origin->id));
    if (n.context) g.insert(root, Term::iri(AS + "context"), Term::iri(*n.context));
    if (const auto* rel = n.relationship_object()) {
        g.insert(root, Term::iri(AS + "object"), Term::iri(rel->id));
    } else {
        g.insert(root, Term::iri(AS + "object"), Term::iri(std::get<std::string>(n.object)));
    }
    g.insert(root, Term::iri(AS + "target"), Term::iri(n.target.id));
    if (n.in_reply_to) g.insert(root, Term::iri(AS + "inReplyTo"), Term::iri(*n.in_reply_to));

    agent_to_graph(n.actor, g);
    if (n.origin) agent_to_graph(*n.origin, g);
    if (const auto* rel = n.relationship_object()) {
        Term node = Term::iri(rel->id);
        g.insert(node, a, Term::iri(std::string(as2::vocab::as_relationship_type)));
        g.insert(node, Term::iri(AS + "object"), Term::iri(rel->object));
        g.insert(node, Term::iri(AS + "relationship"), Term::iri(rel->relationship));
        g.insert(node, Term::iri(AS + "subject"), Term::iri(rel->subject));
    }
    agent_to_graph(n.target, g);

    g.merge(n.remainder);
    return g;
}

// ---------------------------------------------------------------------------
// graph -> Notification
// ---------------------------------------------------------------------------

namespace {

/// Marks profile triples as consumed so the rest can be kept as remainder.
class Consumption {
public:
    explicit Consumption(const Graph& g) : graph_(g), used_(g.size(), false) {}

    void consume(const Term& s, std::string_view p, const Term& o) {
        const auto& ts = graph_.triples();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!used_[i] && ts[i].subject == s && ts[i].predicate.is_iri() &&
                ts[i].predicate.value == p && ts[i].object == o) {
                used_[i] = true;
                return;
            }
        }
    }

    Graph remainder() const {
        Graph out;
        const auto& ts = graph_.triples();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!used_[i]) out.insert(ts[i]);
        }
        return out;
    }

private:
    const Graph& graph_;
    std::vector<bool> used_;
};

struct ProfileReadError {
    std::string message;
};

std::optional<Term> single_object(const Graph& g, const Term& s, const std::string& pred,
                                  std::optional<ProfileReadError>& err) {
    auto values = g.objects(s, pred);
    if (values.size() > 1 && !err) {
        err = ProfileReadError{"multiple values for " + pred};
        return std::nullopt;
    }
    if (values.empty()) return std::nullopt;
    return values.front();
}

as2::AgentDescriptor read_agent(const Graph& g, const Term& node, Consumption& used,
                                std::optional<ProfileReadError>& err) {
    as2::AgentDescriptor agent;
    agent.id = node.value;
    for (const auto& type : g.objects(node, std::string(rdf::rdf_type))) {
        if (!type.is_iri()) continue;
        if (auto kind = as2::agent_kind_from_iri(type.value); kind && !agent.kind) {
            agent.kind = kind;
            used.consume(node, std::string(rdf::rdf_type), type);
        }
    }
    if (auto name = single_object(g, node, AS + "name", err)) {
        if (name->kind == Term::Kind::literal) {
            agent.name = name->value;
            used.consume(node, AS + "name", *name);
        }
    }
    if (auto inbox = single_object(g, node, LDP_INBOX, err)) {
        if (inbox->is_iri()) {
            agent.inbox = inbox->value;
            used.consume(node, LDP_INBOX, *inbox);
        }
    }
    return agent;
}

}  // namespace

ParseResult from_graph(const Graph& g) {
    // the root is the unique node carrying a core activity type
    std::vector<Term> roots;
    std::optional<as2::ActivityType> core;
    for (const auto& t : g.triples()) {
        if (!t.predicate.is_iri() || t.predicate.value != rdf::rdf_type || !t.object.is_iri()) {
            continue;
        }
        if (auto a = as2::activity_from_iri(t.object.value)) {
            if (std::find(roots.begin(), roots.end(), t.subject) != roots.end()) {
                return ParseFailure{ParseFailure::Kind::profile,
                                    "node has more than one core activity type"};
            }
            roots.push_back(t.subject);
            core = a;
        }
    }
    if (roots.empty()) {
        return ParseFailure{ParseFailure::Kind::profile, "no core activity type in document"};
    }
    if (roots.size() > 1) {
        return ParseFailure{ParseFailure::Kind::profile, "multiple activity roots in document"};
    }
    const Term root = roots.front();

    Consumption used(g);
    std::optional<ProfileReadError> err;
    as2::Notification n;
    n.id = root.value;
    n.activity = *core;
    used.consume(root, std::string(rdf::rdf_type), Term::iri(to_iri(*core)));

    for (const auto& type : g.objects(root, std::string(rdf::rdf_type))) {
        if (type.is_iri() && !as2::activity_from_iri(type.value)) {
            n.extension_types.push_back(type.value);
            used.consume(root, std::string(rdf::rdf_type), type);
        }
    }

    auto actor = single_object(g, root, AS + "actor", err);
    if (!actor || !actor->is_iri()) {
        return ParseFailure{ParseFailure::Kind::profile, "notification has no actor"};
    }
    used.consume(root, AS + "actor", *actor);
    n.actor = read_agent(g, *actor, used, err);

    if (auto origin = single_object(g, root, AS + "origin", err); origin && origin->is_iri()) {
        used.consume(root, AS + "origin", *origin);
        n.origin = read_agent(g, *origin, used, err);
    }

    if (auto context = single_object(g, root, AS + "context", err)) {
        if (!context->is_iri()) {
            return ParseFailure{ParseFailure::Kind::profile, "context must be an IRI"};
        }
        used.consume(root, AS + "context", *context);
        n.context = context->value;
    }

    auto object = single_object(g, root, AS + "object", err);
    if (!object || !object->is_iri()) {
        return ParseFailure{ParseFailure::Kind::profile, "notification has no object"};
    }
    used.consume(root, AS + "object", *object);
    const auto object_types = g.objects(*object, std::string(rdf::rdf_type));
    const bool is_relationship =
        std::any_of(object_types.begin(), object_types.end(), [](const Term& t) {
            return t.is_iri() && t.value == as2::vocab::as_relationship_type;
        });
    if (is_relationship) {
        as2::RelationshipObject rel;
        rel.id = object->value;
        used.consume(*object, std::string(rdf::rdf_type),
                     Term::iri(std::string(as2::vocab::as_relationship_type)));
        auto subject = single_object(g, *object, AS + "subject", err);
        auto relationship = single_object(g, *object, AS + "relationship", err);
        auto rel_object = single_object(g, *object, AS + "object", err);
        if (!subject || !relationship || !rel_object || !subject->is_iri() ||
            !relationship->is_iri() || !rel_object->is_iri()) {
            return ParseFailure{ParseFailure::Kind::profile,
                                "relationship object lacks subject/relationship/object"};
        }
        used.consume(*object, AS + "subject", *subject);
        used.consume(*object, AS + "relationship", *relationship);
        used.consume(*object, AS + "object", *rel_object);
        rel.subject = subject->value;
        rel.relationship = relationship->value;
        rel.object = rel_object->value;
        n.object = std::move(rel);
    } else {
        n.object = object->value;
    }

    auto target = single_object(g, root, AS + "target", err);
    if (!target || !target->is_iri()) {
        return ParseFailure{ParseFailure::Kind::profile, "notification has no target"};
    }
    used.consume(root, AS + "target", *target);
    n.target = read_agent(g, *target, used, err);

    if (auto reply = single_object(g, root, AS + "inReplyTo", err)) {
        if (reply->is_iri()) {
            used.consume(root, AS + "inReplyTo", *reply);
            n.in_reply_to = reply->value;
        }
    }

    if (err) return ParseFailure{ParseFailure::Kind::profile, err->message};
    n.remainder = used.remainder();
    return n;
}

// ---------------------------------------------------------------------------
// Turtle
// ---------------------------------------------------------------------------

namespace {

WireDocument serialize_turtle(const as2::Notification& n) {
    Graph g = to_graph(n);
    std::vector<std::pair<std::string, std::string>> prefixes = {
        {"as", AS}, {"ldp", std::string(as2::vocab::ldp_ns)}};
    return WireDocument{std::string(media_turtle), rdf::to_turtle(g, prefixes)};
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON-LD
// ---------------------------------------------------------------------------

namespace {

json term_to_json_value(const Term& t) {
    if (t.is_iri()) return json{{"@id", t.value}};
    json v{{"@value", t.value}};
    if (!t.lang.empty()) v["@language"] = t.lang;
    if (!t.datatype.empty()) v["@type"] = t.datatype;
    return v;
}

/// Append remainder triples for `node` onto the JSON node object; predicates
/// with a context term compact, others stay absolute-IRI keys.
void attach_remainder(json& obj, const Term& node, const Graph& remainder,
                      std::set<std::string>& foreign_done) {
    for (const auto& t : remainder.triples()) {
        if (!(t.subject == node)) continue;
        std::string key = t.predicate.value;
        json value = term_to_json_value(t.object);
        if (auto term = compact_key_for(key)) {
            key = *term;
            if (context_terms().at(key).id_coerced && t.object.is_iri()) value = t.object.value;
        } else if (t.predicate.value == rdf::rdf_type) {
            key = "type";
            value = compact_type(t.object.value);
        }
        if (obj.contains(key)) {
            if (!obj[key].is_array()) obj[key] = json::array({obj[key]});
            obj[key].push_back(value);
        } else {
            obj[key] = value;
        }
    }
    foreign_done.insert(node.value);
}

json agent_to_json(const as2::AgentDescriptor& agent, const Graph& remainder,
                   std::set<std::string>& foreign_done) {
    json obj;
    obj["id"] = agent.id;
    if (agent.kind) obj["type"] = std::string(to_name(*agent.kind));
    if (agent.name) obj["name"] = *agent.name;
    if (agent.inbox) obj["inbox"] = *agent.inbox;
    attach_remainder(obj, Term::iri(agent.id), remainder, foreign_done);
    return obj;
}

WireDocument serialize_jsonld(const as2::Notification& n) {
    std::set<std::string> foreign_done;
    json doc;
    doc["@context"] = std::string(as_context_iri);
    doc["id"] = n.id;
    if (n.extension_types.empty()) {
        doc["type"] = std::string(to_name(n.activity));
    } else {
        json types = json::array({std::string(to_name(n.activity))});
        for (const auto& ext : n.extension_types) types.push_back(compact_type(ext));
        doc["type"] = types;
    }
    doc["actor"] = agent_to_json(n.actor, n.remainder, foreign_done);
    if (n.origin) doc["origin"] = agent_to_json(*n.origin, n.remainder, foreign_done);
    if (n.context) doc["context"] = *n.context;
    if (const auto* rel = n.relationship_object()) {
        json obj;
        obj["id"] = rel->id;
        obj["type"] = "Relationship";
        obj["subject"] = rel->subject;
        obj["relationship"] = rel->relationship;
        obj["object"] = rel->object;
        attach_remainder(obj, Term::iri(rel->id), n.remainder, foreign_done);
        doc["object"] = std::move(obj);
    } else {
        doc["object"] = std::get<std::string>(n.object);
    }
    doc["target"] = agent_to_json(n.target, n.remainder, foreign_done);
    if (n.in_reply_to) doc["inReplyTo"] = *n.in_reply_to;
    attach_remainder(doc, Term::iri(n.id), n.remainder, foreign_done);

    // remainder triples about nodes not present in the tree go to @included
    std::vector<Term> foreign;
    for (const auto& t : n.remainder.triples()) {
        if (!foreign_done.count(t.subject.value) &&
            std::find(foreign.begin(), foreign.end(), t.subject) == foreign.end()) {
            foreign.push_back(t.subject);
        }
    }
    if (!foreign.empty()) {
        json included = json::array();
        for (const auto& node : foreign) {
            json obj;
            obj["id"] = node.value;
            attach_remainder(obj, node, n.remainder, foreign_done);
            included.push_back(std::move(obj));
        }
        doc["@included"] = std::move(included);
    }

    return WireDocument{std::string(media_jsonld), doc.dump(2) + "\n"};
}

// --- JSON-LD -> graph --------------------------------------------------------

struct JsonLdError {
    std::string message;
};

class JsonLdReader {
public:
    explicit JsonLdReader(Graph& g) : graph_(g) {}

    std::optional<JsonLdError> read_document(const json& doc) {
        if (!doc.is_object()) return JsonLdError{"top-level JSON-LD value must be an object"};
        auto result = read_node(doc);
        if (auto* failure = std::get_if<Failure>(&result)) return JsonLdError{failure->message};
        return std::nullopt;
    }

private:
    Graph& graph_;

    struct Failure {
        std::string message;
    };
    using NodeResult = std::variant<Term, Failure>;

    std::optional<Failure> read_node_into(const json& obj, const Term& node) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const std::string& key = it.key();
            const json& value = it.value();
            if (key == "@context" || key == "id" || key == "@id") continue;
            if (key == "type" || key == "@type") {
                for (const auto& t : value.is_array() ? value : json::array({value})) {
                    if (!t.is_string()) return Failure{"type values must be strings"};
                    graph_.insert(node, Term::iri(std::string(rdf::rdf_type)),
                                  Term::iri(expand_type(t.get<std::string>())));
                }
                continue;
            }
            if (key == "@included") {
                if (!value.is_array()) return Failure{"@included must be an array"};
                for (const auto& inc : value) {
                    auto r = read_node(inc);
                    if (auto* f = std::get_if<Failure>(&r)) return *f;
                }
                continue;
            }
            auto terms = context_terms().find(key);
            std::string predicate;
            bool id_coerced = false;
            if (terms != context_terms().end()) {
                predicate = terms->second.iri;
                id_coerced = terms->second.id_coerced;
            } else if (iri::is_absolute(key)) {
                predicate = key;  // absolute-IRI key, kept verbatim
            } else {
                continue;  // no term definition: JSON-LD drops the entry
            }
            for (const auto& v : value.is_array() ? value : json::array({value})) {
                auto err = read_value(node, predicate, id_coerced, v);
                if (err) return err;
            }
        }
        return std::nullopt;
    }

    NodeResult read_node(const json& obj) {
        if (!obj.is_object()) return Failure{"expected a node object"};
        std::string id;
        if (obj.contains("id") && obj["id"].is_string()) {
            id = obj["id"].get<std::string>();
        } else if (obj.contains("@id") && obj["@id"].is_string()) {
            id = obj["@id"].get<std::string>();
        } else {
            id = uuid::urn_uuid();  // skolemize anonymous nodes
        }
        Term node = Term::iri(id);
        if (auto err = read_node_into(obj, node)) return *err;
        return node;
    }

    std::optional<Failure> read_value(const Term& node, const std::string& predicate,
                                      bool id_coerced, const json& v) {
        Term pred = Term::iri(predicate);
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            graph_.insert(node, pred, id_coerced ? Term::iri(s) : Term::literal(s));
            return std::nullopt;
        }
        if (v.is_number_integer()) {
            graph_.insert(node, pred,
                          Term::literal(std::to_string(v.get<long long>()), {},
                                        "http://www.w3.org/2001/XMLSchema#integer"));
            return std::nullopt;
        }
        if (v.is_number()) {
            graph_.insert(node, pred,
                          Term::literal(v.dump(), {}, "http://www.w3.org/2001/XMLSchema#double"));
            return std::nullopt;
        }
        if (v.is_boolean()) {
            graph_.insert(node, pred,
                          Term::literal(v.get<bool>() ? "true" : "false", {},
                                        "http://www.w3.org/2001/XMLSchema#boolean"));
            return std::nullopt;
        }
        if (v.is_object()) {
            if (v.contains("@value")) {
                if (!v["@value"].is_string()) return Failure{"@value must be a string"};
                std::string lang, datatype;
                if (v.contains("@language") && v["@language"].is_string()) {
                    lang = v["@language"].get<std::string>();
                }
                if (v.contains("@type") && v["@type"].is_string()) {
                    datatype = v["@type"].get<std::string>();
                }
                graph_.insert(node, pred,
                              Term::literal(v["@value"].get<std::string>(), lang, datatype));
                return std::nullopt;
            }
            if (v.size() == 1 && v.contains("@id") && v["@id"].is_string()) {
                graph_.insert(node, pred, Term::iri(v["@id"].get<std::string>()));
                return std::nullopt;
            }
            auto r = read_node(v);
            if (auto* f = std::get_if<Failure>(&r)) return *f;
            graph_.insert(node, pred, std::get<Term>(r));
            return std::nullopt;
        }
        return Failure{"unsupported JSON-LD value for " + predicate};
    }
};

std::variant<Graph, ParseFailure> jsonld_to_graph(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
        return ParseFailure{ParseFailure::Kind::malformed, "body is not valid JSON"};
    }
    Graph g;
    JsonLdReader reader(g);
    if (auto err = reader.read_document(doc)) {
        return ParseFailure{ParseFailure::Kind::malformed, err->message};
    }
    return g;
}

}  // namespace

WireDocument serialize(const as2::Notification& n, Format format) {
    auto report = as2::validate_notification(n);
    if (!report.ok()) {
        std::string detail;
        for (const auto& f : report.errors) {
            if (!detail.empty()) detail += "; ";
            detail += f.code;
        }
        throw InvalidNotification("refusing to serialize an invalid notification: " + detail);
    }
    return format == Format::turtle ? serialize_turtle(n) : serialize_jsonld(n);
}

std::variant<rdf::Graph, ParseFailure> document_graph(const WireDocument& doc) {
    auto format = format_for_media_type(doc.media_type);
    if (!format) {
        return ParseFailure{ParseFailure::Kind::malformed,
                            "unsupported media type: " + doc.media_type};
    }
    if (*format == Format::turtle) {
        auto parsed = rdf::parse_turtle(doc.body);
        if (auto* err = std::get_if<rdf::TurtleError>(&parsed)) {
            return ParseFailure{ParseFailure::Kind::malformed,
                                "turtle parse error at line " + std::to_string(err->line) + ": " +
                                    err->message};
        }
        return std::get<Graph>(std::move(parsed));
    }
    return jsonld_to_graph(doc.body);
}

ParseResult parse(const WireDocument& doc) {
    auto graph = document_graph(doc);
    if (auto* err = std::get_if<ParseFailure>(&graph)) return *err;
    return from_graph(std::get<Graph>(graph));
}

}  // namespace valuenet::wire
