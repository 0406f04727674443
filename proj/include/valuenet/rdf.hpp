// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace valuenet::rdf {

inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view xsd_string = "http://www.w3.org/2001/XMLSchema#string";

/// An RDF term. Blank nodes are deliberately absent: every resource this
/// codebase emits gets an IRI or a urn:uuid, and foreign anonymous nodes are
/// skolemized to urn:uuid at parse time.
struct Term {
    enum class Kind { iri, literal };

    Kind kind = Kind::iri;
    std::string value;     // IRI string, or the literal's lexical form
    std::string lang;      // language tag (literals only)
    std::string datatype;  // datatype IRI (literals only; empty means plain/xsd:string)

    static Term iri(std::string v) { return Term{Kind::iri, std::move(v), {}, {}}; }
    static Term literal(std::string v, std::string lang = {}, std::string datatype = {}) {
        if (datatype == xsd_string) datatype.clear();  // RDF 1.1: simple literal == xsd:string
        return Term{Kind::literal, std::move(v), std::move(lang), std::move(datatype)};
    }

    bool is_iri() const { return kind == Kind::iri; }
    auto operator<=>(const Term&) const = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;
    auto operator<=>(const Triple&) const = default;
};

/// Triple set with stable insertion order (duplicates collapse).
class Graph {
public:
    void insert(Triple t);
    void insert(Term s, Term p, Term o) { insert(Triple{std::move(s), std::move(p), std::move(o)}); }
    void merge(const Graph& other);

    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t size() const { return triples_.size(); }
    bool empty() const { return triples_.empty(); }
    bool contains(const Triple& t) const;

    /// All objects o such that (s, p, o) is in the graph, in insertion order.
    std::vector<Term> objects(const Term& s, std::string_view predicate_iri) const;
    std::optional<Term> object(const Term& s, std::string_view predicate_iri) const;
    std::vector<Term> subjects_with_type(std::string_view type_iri) const;

    bool operator==(const Graph& other) const;

private:
    std::vector<Triple> triples_;
};

/// True when the two graphs are equal up to a bijective renaming of their
/// urn:uuid terms (the "skolem" identifiers minted for messages and
/// relationship nodes).
bool isomorphic(const Graph& a, const Graph& b);

struct TurtleError {
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
};

/// Parse the Turtle subset used by the notification profile: @prefix/@base
/// (and SPARQL-style PREFIX/BASE), IRIs, prefixed names, `a`, string literals
/// with language tags or datatypes, numeric and boolean literals, and
/// `;`/`,` predicate-object lists. Never throws on malformed input.
std::variant<Graph, TurtleError> parse_turtle(std::string_view text);

/// Serialize with the given prefix table (pairs of label, namespace IRI).
/// Triples are grouped by subject in first-appearance order.
std::string to_turtle(const Graph& g,
                      const std::vector<std::pair<std::string, std::string>>& prefixes);

}  // namespace valuenet::rdf
