// SPDX-License-Identifier: Apache-2.0

#include "valuenet/scholix.hpp"

#include "valuenet/iri.hpp"

#include <json.hpp>

#include <fstream>

namespace valuenet::scholix {

using nlohmann::json;

namespace {

const json* field(const json& obj, std::initializer_list<const char*> names) {
    if (!obj.is_object()) return nullptr;
    for (const char* name : names) {
        if (auto it = obj.find(name); it != obj.end()) return &*it;
    }
    return nullptr;
}

std::string string_or_empty(const json* v) {
    return v && v->is_string() ? v->get<std::string>() : std::string{};
}

std::optional<LinkEndpoint> read_endpoint(const json& node, std::string& error) {
    LinkEndpoint endpoint;
    if (!node.is_object()) {
        error = "endpoint is not an object";
        return std::nullopt;
    }
    endpoint.type = string_or_empty(field(node, {"Type", "type"}));

    const json* identifiers = field(node, {"Identifier", "identifier", "Identifiers"});
    if (!identifiers) {
        error = "endpoint has no identifier";
        return std::nullopt;
    }
    json list = identifiers->is_array() ? *identifiers : json::array({*identifiers});
    for (const auto& ident : list) {
        auto scheme = string_or_empty(field(ident, {"IDScheme", "idScheme", "scheme"}));
        auto id = string_or_empty(field(ident, {"ID", "id", "identifier"}));
        auto id_url = string_or_empty(field(ident, {"IDURL", "idURL", "idUrl", "url"}));
        auto pid = discovery::pid_from_scholix(scheme, id, id_url);
        if (pid && !endpoint.pid) endpoint.pid = pid;
        if (!endpoint.url && pid && iri::is_http(pid->url_form)) endpoint.url = pid->url_form;
    }
    return endpoint;
}

std::string relationship_iri(const json& record, std::string& error) {
    const json* rel = field(record, {"RelationshipType", "relationshipType", "relationship"});
    if (!rel) {
        error = "record has no relationship";
        return {};
    }
    std::string name;
    if (rel->is_string()) {
        name = rel->get<std::string>();
    } else {
        name = string_or_empty(field(*rel, {"Name", "name"}));
    }
    if (name.empty()) {
        error = "relationship has no name";
        return {};
    }
    if (iri::is_absolute(name)) return name;
    return std::string(scholix_ns) + name;
}

std::string provider_name(const json& record) {
    const json* provider = field(record, {"LinkProvider", "linkProvider", "provider"});
    if (!provider) return {};
    if (provider->is_string()) return provider->get<std::string>();
    if (provider->is_array() && !provider->empty()) {
        return string_or_empty(field(provider->front(), {"Name", "name"}));
    }
    if (provider->is_object()) return string_or_empty(field(*provider, {"Name", "name"}));
    return {};
}

void read_record(const json& record, std::size_t index, LoadResult& out,
                 const InverseTable& table) {
    if (!record.is_object()) {
        out.schema_errors.push_back("record " + std::to_string(index) + ": not an object");
        return;
    }
    const json* source = field(record, {"Source", "source"});
    const json* target = field(record, {"Target", "target"});
    if (!source || !target) {
        out.schema_errors.push_back("record " + std::to_string(index) +
                                    ": missing source or target");
        return;
    }
    std::string error;
    auto src = read_endpoint(*source, error);
    if (!src) {
        out.schema_errors.push_back("record " + std::to_string(index) + ": source: " + error);
        return;
    }
    auto tgt = read_endpoint(*target, error);
    if (!tgt) {
        out.schema_errors.push_back("record " + std::to_string(index) + ": target: " + error);
        return;
    }
    std::string relationship = relationship_iri(record, error);
    if (relationship.empty()) {
        out.schema_errors.push_back("record " + std::to_string(index) + ": " + error);
        return;
    }
    if (!table.knows(relationship)) {
        out.schema_errors.push_back("record " + std::to_string(index) +
                                    ": unknown relationship term " + relationship);
        return;
    }

    // the experiment needs resolvable artifact URLs on both ends
    if (!src->url) {
        out.skipped.push_back({index, "source", "missing artifact URL"});
        return;
    }
    if (!tgt->url) {
        out.skipped.push_back({index, "target", "missing artifact URL"});
        return;
    }

    ScholixLink link;
    link.source = std::move(*src);
    link.target = std::move(*tgt);
    link.relationship = std::move(relationship);
    link.provider = provider_name(record);
    auto date = string_or_empty(field(record, {"LinkPublicationDate", "linkPublicationDate"}));
    if (!date.empty()) link.publication_date = date;
    out.links.push_back(std::move(link));
}

}  // namespace

LoadResult parse_scholix(std::string_view text) {
    LoadResult out;
    const InverseTable table = InverseTable::builtin();

    json doc = json::parse(text, nullptr, false);
    if (!doc.is_discarded()) {
        const json* records = &doc;
        if (doc.is_object()) {
            if (const json* page = field(doc, {"result", "results", "records"})) records = page;
        }
        if (records->is_array()) {
            for (std::size_t i = 0; i < records->size(); ++i) {
                read_record((*records)[i], i, out, table);
            }
            return out;
        }
        if (records->is_object()) {
            read_record(*records, 0, out, table);
            return out;
        }
        out.schema_errors.push_back("input is neither a record array nor a record");
        return out;
    }

    // newline-delimited records
    std::size_t index = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        std::string_view line =
            text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            out.schema_errors.push_back("record " + std::to_string(index) + ": invalid JSON");
        } else {
            read_record(record, index, out, table);
        }
        ++index;
    }
    return out;
}

LoadResult load_scholix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        LoadResult out;
        out.schema_errors.push_back("cannot open " + path.string());
        return out;
    }
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    return parse_scholix(text);
}

// ---------------------------------------------------------------------------
// Inverse-relation table
// ---------------------------------------------------------------------------

InverseTable InverseTable::builtin() {
    InverseTable t;
    auto pair = [&t](std::string_view a, std::string_view b) {
        t.inverse_[std::string(scholix_ns) + std::string(a)] =
            std::string(scholix_ns) + std::string(b);
        t.inverse_[std::string(scholix_ns) + std::string(b)] =
            std::string(scholix_ns) + std::string(a);
    };
    pair("References", "IsReferencedBy");
    pair("IsSupplementTo", "IsSupplementedBy");
    pair("IsRelatedTo", "IsRelatedTo");
    return t;
}

InverseTable InverseTable::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open inverse-relation table: " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw std::runtime_error("inverse-relation table is not a JSON object: " + path.string());
    }
    InverseTable t;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!it.value().is_string()) continue;
        const std::string a = it.key();
        const std::string b = it.value().get<std::string>();
        t.inverse_[a] = b;
        t.inverse_[b] = a;
    }
    return t;
}

bool InverseTable::knows(const std::string& relationship_iri) const {
    return inverse_.count(relationship_iri) > 0;
}

std::string InverseTable::inverse_of(const std::string& relationship_iri) const {
    auto it = inverse_.find(relationship_iri);
    // unlisted terms are treated as symmetric, like IsRelatedTo
    return it == inverse_.end() ? relationship_iri : it->second;
}

// ---------------------------------------------------------------------------
// Fan-out
// ---------------------------------------------------------------------------

as2::RelationshipObject link_to_relationship(const ScholixLink& link, Direction direction,
                                             const InverseTable& table) {
    if (!link.source.url || !link.target.url) {
        throw MissingUrl("both endpoint URLs must be known to state a relationship");
    }
    as2::RelationshipObject rel;
    if (direction == Direction::forward) {
        rel.subject = *link.source.url;
        rel.relationship = link.relationship;
        rel.object = *link.target.url;
    } else {
        rel.subject = *link.target.url;
        rel.relationship = table.inverse_of(link.relationship);
        rel.object = *link.source.url;
    }
    return rel;
}

namespace {

as2::AgentDescriptor host_agent(const discovery::InboxRef& inbox) {
    as2::AgentDescriptor agent;
    agent.id = "https://" + inbox.landing_host + "/about#us";
    agent.kind = as2::AgentKind::organization;
    agent.name = inbox.landing_host;
    agent.inbox = inbox.inbox_url;
    return agent;
}

}  // namespace

namespace {

struct AddressedEndpoint {
    const discovery::InboxRef* inbox = nullptr;
    std::string failure;  // why the endpoint cannot be addressed
};

AddressedEndpoint address_endpoint(const LinkEndpoint& endpoint,
                                   const std::map<std::string, std::string>& resolved,
                                   const std::map<std::string, discovery::InboxRef>& inbox_map) {
    AddressedEndpoint out;
    if (!endpoint.url) {
        out.failure = "missing artifact URL";
        return out;
    }
    auto landing = resolved.find(*endpoint.url);
    if (landing == resolved.end() || landing->second.empty()) {
        out.failure = "unresolved endpoint";
        return out;
    }
    const std::string host = iri::host_of(landing->second);
    auto inbox = inbox_map.find(host);
    if (inbox == inbox_map.end()) {
        out.failure = "no inbox for host " + host;
        return out;
    }
    out.inbox = &inbox->second;
    return out;
}

}  // namespace

FanOutResult fan_out(const std::vector<ScholixLink>& links,
                     const std::map<std::string, std::string>& resolved,
                     const std::map<std::string, discovery::InboxRef>& inbox_map,
                     const FanOutConfig& config, const InverseTable& table) {
    FanOutResult out;
    for (std::size_t i = 0; i < links.size(); ++i) {
        const ScholixLink& link = links[i];
        auto source = address_endpoint(link.source, resolved, inbox_map);
        auto target = address_endpoint(link.target, resolved, inbox_map);

        // a link travels as a pair or not at all: count == 2 x resolvable links
        if (!source.inbox || !target.inbox) {
            out.skipped.push_back(
                {i, "source", source.inbox ? "partner endpoint unaddressable" : source.failure});
            out.skipped.push_back(
                {i, "target", target.inbox ? "partner endpoint unaddressable" : target.failure});
            continue;
        }

        auto forward = link_to_relationship(link, Direction::forward, table);
        out.items.push_back(FanOutItem{as2::build_announce(config.actor, config.origin,
                                                           forward.subject, forward,
                                                           host_agent(*source.inbox)),
                                       *source.inbox, i});
        auto inverse = link_to_relationship(link, Direction::inverse, table);
        out.items.push_back(FanOutItem{as2::build_announce(config.actor, config.origin,
                                                           inverse.subject, inverse,
                                                           host_agent(*target.inbox)),
                                       *target.inbox, i});
    }
    return out;
}

}  // namespace valuenet::scholix
