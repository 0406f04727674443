// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "valuenet/rdf.hpp"

#include <random>

using namespace valuenet;
using rdf::Graph;
using rdf::Term;

namespace {

Graph must_parse(std::string_view turtle) {
    auto parsed = rdf::parse_turtle(turtle);
    auto* err = std::get_if<rdf::TurtleError>(&parsed);
    if (err) {
        FAIL("turtle parse failed at line ", err->line, ": ", err->message);
    }
    return std::get<Graph>(parsed);
}

}  // namespace

TEST_CASE("turtle basics: prefixes, a, semicolons, commas, literals") {
    auto g = must_parse(R"(
@prefix ex: <https://example.org/ns#> .
@prefix as: <https://www.w3.org/ns/activitystreams#> .

<https://example.org/thing> a ex:Widget ;
  ex:label "hello" ;
  ex:tag "a", "b" ;
  as:name "n\"ame"@en .
)");
    Term thing = Term::iri("https://example.org/thing");
    CHECK(g.size() == 5);
    CHECK(g.object(thing, "https://example.org/ns#label") ==
          Term::literal("hello"));
    CHECK(g.objects(thing, "https://example.org/ns#tag").size() == 2);
    auto name = g.object(thing, "https://www.w3.org/ns/activitystreams#name");
    REQUIRE(name);
    CHECK(name->value == "n\"ame");
    CHECK(name->lang == "en");
}

TEST_CASE("turtle numbers, booleans, datatypes, base") {
    auto g = must_parse(R"(
@base <https://example.org/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
<rel/x> <p> 42 .
<rel/x> <q> 3.14 .
<rel/x> <r> true .
<rel/x> <s> "2022-05-10"^^xsd:date .
)");
    Term x = Term::iri("https://example.org/rel/x");
    CHECK(g.object(x, "https://example.org/p")->datatype ==
          "http://www.w3.org/2001/XMLSchema#integer");
    CHECK(g.object(x, "https://example.org/q")->datatype ==
          "http://www.w3.org/2001/XMLSchema#decimal");
    CHECK(g.object(x, "https://example.org/r")->value == "true");
    CHECK(g.object(x, "https://example.org/s")->datatype ==
          "http://www.w3.org/2001/XMLSchema#date");
}

TEST_CASE("turtle parse errors are reported, not thrown") {
    const char* bad[] = {
        "<https://a> <https://b> .",           // missing object
        "<https://a> <https://b> \"open .",    // unterminated literal
        "ex:a ex:b ex:c .",                    // unknown prefix
        "<https://a> <https://b> [] .",        // blank nodes unsupported
        "@prefix broken",                      // truncated directive
        "<https://a> <https://b> <https://c>", // missing final dot
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK(std::holds_alternative<rdf::TurtleError>(rdf::parse_turtle(text)));
    }
}

TEST_CASE("turtle parsing is total over mangled inputs") {
    std::mt19937 rng(42);
    const std::string seedtext = R"(@prefix as: <https://www.w3.org/ns/activitystreams#> .
<urn:uuid:1> a as:Announce ; as:name "x" .)";
    for (int round = 0; round < 500; ++round) {
        std::string mutated = seedtext;
        std::uniform_int_distribution<std::size_t> pos(0, mutated.size() - 1);
        std::uniform_int_distribution<int> byte(0, 255);
        for (int edits = 0; edits < 5; ++edits) {
            mutated[pos(rng)] = static_cast<char>(byte(rng));
        }
        (void)rdf::parse_turtle(mutated);  // must neither crash nor hang
    }
    CHECK(true);
}

TEST_CASE("serialization round-trips through the parser") {
    Graph g;
    g.insert(Term::iri("urn:uuid:00000000-0000-4000-8000-000000000001"),
             Term::iri(std::string(rdf::rdf_type)),
             Term::iri("https://www.w3.org/ns/activitystreams#Announce"));
    g.insert(Term::iri("urn:uuid:00000000-0000-4000-8000-000000000001"),
             Term::iri("https://www.w3.org/ns/activitystreams#name"),
             Term::literal("tricky \"quotes\"\nand newline"));
    g.insert(Term::iri("https://a.example/x"), Term::iri("https://p.example/p"),
             Term::literal("42", "", "http://www.w3.org/2001/XMLSchema#integer"));
    g.insert(Term::iri("https://a.example/x"), Term::iri("https://p.example/q"),
             Term::literal("bonjour", "fr", ""));

    auto text = rdf::to_turtle(g, {{"as", "https://www.w3.org/ns/activitystreams#"}});
    auto back = must_parse(text);
    CHECK(back == g);
}

TEST_CASE("isomorphism treats urn:uuid terms as renameable") {
    auto g1 = must_parse(R"(
<urn:uuid:aaa> <https://p.example/p> <https://o.example/1> .
<urn:uuid:aaa> <https://p.example/q> <urn:uuid:bbb> .
)");
    auto g2 = must_parse(R"(
<urn:uuid:xxx> <https://p.example/p> <https://o.example/1> .
<urn:uuid:xxx> <https://p.example/q> <urn:uuid:yyy> .
)");
    auto g3 = must_parse(R"(
<urn:uuid:xxx> <https://p.example/p> <https://o.example/1> .
<urn:uuid:yyy> <https://p.example/q> <urn:uuid:xxx> .
)");
    CHECK(rdf::isomorphic(g1, g2));
    CHECK_FALSE(rdf::isomorphic(g1, g3));

    // non-uuid IRIs must match exactly
    auto g4 = must_parse("<https://a.example/1> <https://p.example/p> <https://o.example/1> .");
    auto g5 = must_parse("<https://a.example/2> <https://p.example/p> <https://o.example/1> .");
    CHECK_FALSE(rdf::isomorphic(g4, g5));
    CHECK(rdf::isomorphic(g4, g4));
}

TEST_CASE("isomorphism requires a consistent bijection") {
    // two uuid nodes with identical arc shapes collapse onto one only if
    // the mapping stays one-to-one
    auto g1 = must_parse(R"(
<urn:uuid:a> <https://p.example/p> <https://o.example/1> .
<urn:uuid:b> <https://p.example/p> <https://o.example/1> .
)");
    auto g2 = must_parse(R"(
<urn:uuid:c> <https://p.example/p> <https://o.example/1> .
)");
    CHECK_FALSE(rdf::isomorphic(g1, g2));  // sizes differ
    auto g3 = must_parse(R"(
<urn:uuid:c> <https://p.example/p> <https://o.example/1> .
<urn:uuid:d> <https://p.example/p> <https://o.example/1> .
)");
    CHECK(rdf::isomorphic(g1, g3));
}
