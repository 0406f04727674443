// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "valuenet/iri.hpp"
#include "valuenet/link_header.hpp"

using namespace valuenet;

TEST_CASE("absolute and http IRI checks") {
    CHECK(iri::is_absolute("https://example.org/a"));
    CHECK(iri::is_absolute("urn:uuid:240c0091-b271-4e44-87f7-5598da5b24ad"));
    CHECK(iri::is_absolute("mailto:person@example.org"));
    CHECK_FALSE(iri::is_absolute("artifact/13"));
    CHECK_FALSE(iri::is_absolute("/inbox"));
    CHECK_FALSE(iri::is_absolute(""));
    CHECK_FALSE(iri::is_absolute("has space:nope"));

    CHECK(iri::is_http("http://example.org"));
    CHECK(iri::is_http("https://example.org/x#frag"));
    CHECK_FALSE(iri::is_http("urn:uuid:1234"));
    CHECK_FALSE(iri::is_http("ftp://example.org/x"));
}

TEST_CASE("host extraction keeps the port and lowercases") {
    CHECK(iri::host_of("https://ArXiv.org/abs/1") == "arxiv.org");
    CHECK(iri::host_of("https://repo.example:8443/x") == "repo.example:8443");
    CHECK(iri::host_of("http://user@site.example/z") == "site.example");
    CHECK(iri::host_of("urn:uuid:abc") == "");
}

TEST_CASE("relative reference resolution") {
    const std::string base = "https://example.org/dir/page.html?q=1";
    CHECK(iri::resolve(base, "https://other.org/x") == "https://other.org/x");
    CHECK(iri::resolve(base, "/inbox") == "https://example.org/inbox");
    CHECK(iri::resolve(base, "other.html") == "https://example.org/dir/other.html");
    CHECK(iri::resolve(base, "../up") == "https://example.org/up");
    CHECK(iri::resolve(base, "./same") == "https://example.org/dir/same");
    CHECK(iri::resolve(base, "//cdn.example/y") == "https://cdn.example/y");
    CHECK(iri::resolve(base, "?k=v") == "https://example.org/dir/page.html?k=v");
    CHECK(iri::resolve(base, "#sec") == "https://example.org/dir/page.html?q=1#sec");
    CHECK(iri::resolve("https://example.org", "/a/b/../c") == "https://example.org/a/c");
}

TEST_CASE("link header parsing") {
    auto links = web::parse_link_header(
        "</inbox>; rel=\"http://www.w3.org/ns/ldp#inbox\", "
        "<https://example.org/style>; rel=stylesheet; type=\"text/css\"");
    REQUIRE(links.size() == 2);
    CHECK(links[0].target == "/inbox");
    CHECK(web::has_rel(links[0], "http://www.w3.org/ns/ldp#inbox"));
    CHECK(links[1].target == "https://example.org/style");
    CHECK(web::has_rel(links[1], "stylesheet"));
    CHECK(links[1].params.at("type") == "text/css");
}

TEST_CASE("link header is robust to reordering, case and quoting") {
    // the same link-value written four ways
    const char* variants[] = {
        "<https://x.example/inbox>; rel=\"http://www.w3.org/ns/ldp#inbox\"; title=\"i\"",
        "<https://x.example/inbox>; title=\"i\"; rel=\"http://www.w3.org/ns/ldp#inbox\"",
        "<https://x.example/inbox>; REL=\"http://www.w3.org/ns/ldp#inbox\"",
        "<https://x.example/inbox>;rel=http://www.w3.org/ns/ldp#inbox",
    };
    for (const char* v : variants) {
        CAPTURE(v);
        auto links = web::parse_link_header(v);
        REQUIRE(links.size() == 1);
        CHECK(links[0].target == "https://x.example/inbox");
        CHECK(web::has_rel(links[0], "http://www.w3.org/ns/ldp#inbox"));
    }
}

TEST_CASE("link header multi-relation rel and garbage tolerance") {
    auto links = web::parse_link_header(
        "<https://a.example/i>; rel=\"alternate http://www.w3.org/ns/ldp#inbox\"");
    REQUIRE(links.size() == 1);
    CHECK(web::has_rel(links[0], "http://www.w3.org/ns/ldp#inbox"));

    CHECK(web::parse_link_header("").empty());
    CHECK(web::parse_link_header("garbage without target").empty());
    CHECK(web::parse_link_header("<unterminated").empty());
}
