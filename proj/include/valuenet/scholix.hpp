// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/as2_model.hpp"
#include "valuenet/discovery.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace valuenet::scholix {

inline constexpr std::string_view scholix_ns = "http://www.scholix.org/";

/// One side of a data-literature link.
struct LinkEndpoint {
    std::optional<discovery::PidUrl> pid;
    std::optional<std::string> url;  // artifact URL as carried in the record
    std::string type;                // "publication", "dataset", ...

    bool operator==(const LinkEndpoint&) const = default;
};

/// One Scholix link-information package entry.
struct ScholixLink {
    LinkEndpoint source;
    LinkEndpoint target;
    std::string relationship;  // IRI in the scholix.org namespace
    std::string provider;
    std::optional<std::string> publication_date;

    bool operator==(const ScholixLink&) const = default;
};

struct SkipEntry {
    std::size_t record_index = 0;
    std::string endpoint;  // "source", "target" or "record"
    std::string reason;
};

struct LoadResult {
    std::vector<ScholixLink> links;
    std::vector<SkipEntry> skipped;          // records excluded with a reason
    std::vector<std::string> schema_errors;  // per-record schema findings
};

/// Accepts a JSON array of records, a ScholeXplorer-style page object with a
/// "result" array, or newline-delimited records. Field names are matched in
/// both the published PascalCase and the API's lowercase forms. Records
/// whose endpoints carry no artifact URL go to the skip report instead of
/// failing the load.
LoadResult parse_scholix(std::string_view text);
LoadResult load_scholix(const std::filesystem::path& path);

/// Inverse-relation pairs (References <-> IsReferencedBy, ...), shipped as
/// an editable data file with the builtin table as fallback.
class InverseTable {
public:
    static InverseTable builtin();
    static InverseTable from_file(const std::filesystem::path& path);

    bool knows(const std::string& relationship_iri) const;
    std::string inverse_of(const std::string& relationship_iri) const;

private:
    std::map<std::string, std::string> inverse_;
};

class MissingUrl : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Direction { forward, inverse };

/// The by-reference statement for one delivery direction: forward keeps the
/// record's orientation, inverse swaps the endpoints and replaces the
/// relation by its inverse term (so the subject is the addressee's artifact).
as2::RelationshipObject link_to_relationship(const ScholixLink& link, Direction direction,
                                             const InverseTable& table = InverseTable::builtin());

struct FanOutConfig {
    as2::AgentDescriptor actor;   // the link provider's agent
    as2::AgentDescriptor origin;  // the sending service's agent
};

struct FanOutItem {
    as2::Notification notification;
    discovery::InboxRef inbox;
    std::size_t link_index = 0;
};

struct FanOutResult {
    std::vector<FanOutItem> items;
    std::vector<SkipEntry> skipped;  // endpoints that could not be addressed
};

/// Fan a link network out to per-host inboxes: each link yields one message
/// to the source-host inbox and one to the target-host inbox, each oriented
/// so its relationship subject (and context) is the addressee's artifact.
/// `resolved` maps artifact URLs to landing URLs; `inbox_map` maps landing
/// hosts to inboxes. Output order is input order, source before target.
FanOutResult fan_out(const std::vector<ScholixLink>& links,
                     const std::map<std::string, std::string>& resolved,
                     const std::map<std::string, discovery::InboxRef>& inbox_map,
                     const FanOutConfig& config,
                     const InverseTable& table = InverseTable::builtin());

}  // namespace valuenet::scholix
