// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "valuenet/as2_model.hpp"
#include "valuenet/rdf.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace valuenet::wire {

enum class Format { jsonld, turtle };

inline constexpr std::string_view media_jsonld = "application/ld+json";
inline constexpr std::string_view media_turtle = "text/turtle";

std::string_view media_type_of(Format f);

/// Match a Content-Type header value (parameters ignored) against the
/// supported formats.
std::optional<Format> format_for_media_type(std::string_view content_type);

struct WireDocument {
    std::string media_type;
    std::string body;  // UTF-8 bytes

    bool operator==(const WireDocument&) const = default;
};

/// Serializing a notification that fails profile validation.
class InvalidNotification : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failures are values, not exceptions: parsing is total over
/// arbitrary byte inputs.
struct ParseFailure {
    enum class Kind {
        malformed,  // not a readable document in the declared media type
        profile     // readable RDF, but outside the notification profile
    };
    Kind kind = Kind::malformed;
    std::string message;
};

using ParseResult = std::variant<as2::Notification, ParseFailure>;

inline bool ok(const ParseResult& r) { return std::holds_alternative<as2::Notification>(r); }

/// The RDF graph a notification denotes; shared by both serializations and
/// by graph-comparison tests.
rdf::Graph to_graph(const as2::Notification& n);

/// Rebuild a notification from a graph. Unconsumed triples land in
/// Notification::remainder for lossless re-emission.
ParseResult from_graph(const rdf::Graph& g);

/// Emit the notification in the requested format. JSON-LD is compacted
/// against the bundled ActivityStreams context (no network fetch); Turtle
/// uses the as:/ldp: prefixes.
WireDocument serialize(const as2::Notification& n, Format format);

/// Parse a wire document into a notification.
ParseResult parse(const WireDocument& doc);

/// Parsed graph of a document, regardless of the profile; used by graph
/// comparison in tests. Returns ParseFailure on malformed input.
std::variant<rdf::Graph, ParseFailure> document_graph(const WireDocument& doc);

}  // namespace valuenet::wire
