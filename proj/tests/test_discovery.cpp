// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "valuenet/discovery.hpp"
#include "valuenet/harness.hpp"

using namespace valuenet;
using namespace valuenet::testing;

namespace {

discovery::Resolver mock_resolver(const harness::MockPidServer& mock,
                                  discovery::Resolver::Options options = {}) {
    options.host_override = mock.override_all();
    options.limits.timeout = std::chrono::seconds(5);
    return discovery::Resolver(options);
}

}  // namespace

TEST_CASE("PID prefix rules") {
    CHECK(discovery::make_pid(discovery::PidScheme::doi, "10.5061/dryad.10hq7").url_form ==
          "https://doi.org/10.5061/dryad.10hq7");
    CHECK(discovery::make_pid(discovery::PidScheme::handle, "1854/LU-8646849").url_form ==
          "http://hdl.handle.net/1854/LU-8646849");
    CHECK(discovery::make_pid(discovery::PidScheme::pmid, "35279900").url_form ==
          "https://pubmed.ncbi.nlm.nih.gov/35279900");
    CHECK(discovery::make_pid(discovery::PidScheme::pmc, "PMC8920032").url_form ==
          "https://www.ncbi.nlm.nih.gov/pmc/articles/PMC8920032");
    CHECK(discovery::make_pid(discovery::PidScheme::arxiv, "2204.08966").url_form ==
          "https://arxiv.org/abs/2204.08966");
    CHECK(discovery::make_pid(discovery::PidScheme::http_url, "https://x.example/a").url_form ==
          "https://x.example/a");
    CHECK_THROWS_AS(discovery::make_pid(discovery::PidScheme::http_url, "no scheme"),
                    discovery::InvalidUrl);

    auto from_record = discovery::pid_from_scholix("doi", "10.1/x", "");
    REQUIRE(from_record);
    CHECK(from_record->url_form == "https://doi.org/10.1/x");
    auto with_url = discovery::pid_from_scholix("doi", "10.1/x", "https://dx.doi.org/10.1/x");
    REQUIRE(with_url);
    CHECK(with_url->url_form == "https://dx.doi.org/10.1/x");  // the record's URL wins
    CHECK_FALSE(discovery::pid_from_scholix("lirias", "LIRIAS123", ""));
}

TEST_CASE("redirect chains resolve to the landing page with counted hops") {
    harness::MockPidServer mock;
    mock.start();
    auto resolver = mock_resolver(mock);

    SUBCASE("one hop") {
        auto pid = discovery::make_pid(discovery::PidScheme::http_url,
                                       "http://pid.example/r/org1.example/a1");
        auto result = resolver.resolve(pid);
        CHECK(result.ok());
        CHECK(result.status == 200);
        CHECK(result.hops == 1);
        CHECK(result.landing_url == "http://org1.example/artifact/a1");
    }
    SUBCASE("three hops via the hop ladder") {
        auto result = resolver.resolve(discovery::make_pid(
            discovery::PidScheme::http_url, "http://pid.example/hop/2/org9.example/a2"));
        CHECK(result.ok());
        CHECK(result.hops == 3);
        CHECK(result.landing_url == "http://org9.example/artifact/a2");
    }
    SUBCASE("a loop hits the redirect limit") {
        discovery::Resolver::Options options;
        options.limits.max_hops = 5;
        auto limited = mock_resolver(mock, options);
        auto result = limited.resolve(discovery::make_pid(discovery::PidScheme::http_url,
                                                          "http://loopy.example/loop/a"));
        CHECK_FALSE(result.ok());
        REQUIRE(result.error.has_value());
        CHECK(*result.error == discovery::ResolveError::too_many_redirects);
        CHECK(result.hops == 5);
    }
    SUBCASE("non-200 terminal status is recorded, not thrown") {
        auto result = resolver.resolve(discovery::make_pid(discovery::PidScheme::http_url,
                                                           "http://sad.example/status/503"));
        CHECK_FALSE(result.ok());
        CHECK(result.status == 503);
        CHECK(result.landing_url.empty());
    }
    mock.stop();
}

TEST_CASE("unreachable hosts report a network error") {
    discovery::Resolver::Options options;
    options.limits.timeout = std::chrono::seconds(1);
    // an unroutable override keeps the test offline
    options.host_override = [](const std::string&, int) {
        return std::make_pair(std::string("127.0.0.1"), 1);
    };
    discovery::Resolver resolver(options);
    auto result = resolver.resolve(
        discovery::make_pid(discovery::PidScheme::http_url, "http://nowhere.example/x"));
    CHECK_FALSE(result.ok());
    CHECK(result.error.has_value());
}

TEST_CASE("per-URL memoization resolves repeats once") {
    harness::MockPidServer mock;
    mock.start();
    auto resolver = mock_resolver(mock);
    auto pid = discovery::make_pid(discovery::PidScheme::http_url,
                                   "http://pid.example/r/orgX.example/a1");
    std::vector<discovery::PidUrl> batch(64, pid);
    auto results = resolver.resolve_all(batch, 8);
    REQUIRE(results.size() == 64);
    for (const auto& r : results) {
        CHECK(r.ok());
        CHECK(r.landing_url == results.front().landing_url);
    }
    mock.stop();
}

TEST_CASE("resolution plus header discovery finds the advertised inbox") {
    harness::MockPidServer mock;
    mock.start();
    auto resolver = mock_resolver(mock);
    auto result = resolver.resolve(
        discovery::make_pid(discovery::PidScheme::http_url,
                            "http://pid.example/hop/0/arxiv.org/artifact-with-inbox-x"));
    // the mock emits the Link header only on /artifact-with-inbox/ pages
    auto direct = resolver.resolve(discovery::make_pid(
        discovery::PidScheme::http_url, "http://arxiv.org/artifact-with-inbox/x"));
    REQUIRE(direct.ok());
    auto found = discovery::discover_inbox(direct.landing_url, direct.final_headers);
    REQUIRE(found);
    CHECK(found->inbox_url == "http://arxiv.org/inbox");
    CHECK(found->source == discovery::InboxRef::Source::link_header);
    CHECK(found->landing_host == "arxiv.org");
    (void)result;
    mock.stop();
}

TEST_CASE("discover_inbox precedence and fallbacks") {
    const std::string landing = "https://arxiv.org/abs/2204.08966";
    using Headers = std::vector<std::pair<std::string, std::string>>;

    SUBCASE("Link header, relative target") {
        Headers headers{{"Link", "</inbox>; rel=\"http://www.w3.org/ns/ldp#inbox\""}};
        auto found = discovery::discover_inbox(landing, headers);
        REQUIRE(found);
        CHECK(found->inbox_url == "https://arxiv.org/inbox");
        CHECK(found->source == discovery::InboxRef::Source::link_header);
    }
    SUBCASE("no header, no body: empty") {
        CHECK_FALSE(discovery::discover_inbox(landing, {}));
    }
    SUBCASE("header wins over an HTML link") {
        Headers headers{{"Link", "</from-header>; rel=\"http://www.w3.org/ns/ldp#inbox\""}};
        std::string body =
            "<html><head><link rel=\"http://www.w3.org/ns/ldp#inbox\" "
            "href=\"/from-html\"></head></html>";
        auto found = discovery::discover_inbox(landing, headers, body);
        REQUIRE(found);
        CHECK(found->inbox_url == "https://arxiv.org/from-header");
    }
    SUBCASE("HTML fallback used when no header matches") {
        Headers headers{{"Link", "</css>; rel=stylesheet"}};
        std::string body =
            "<html><head><LINK REL='http://www.w3.org/ns/ldp#inbox' href='/from-html'>"
            "</head></html>";
        auto found = discovery::discover_inbox(landing, headers, body);
        REQUIRE(found);
        CHECK(found->inbox_url == "https://arxiv.org/from-html");
        CHECK(found->source == discovery::InboxRef::Source::html_link);
        CHECK_FALSE(discovery::discover_inbox(landing, headers, body, false));
    }
    SUBCASE("unrelated rels never match") {
        Headers headers{{"Link", "<https://x.example/i>; rel=\"inbox\""}};
        CHECK_FALSE(discovery::discover_inbox(landing, headers));
    }
}

TEST_CASE("proxy inbox generation is a pure host-level rule") {
    auto a = discovery::generate_proxy_inbox("https://arxiv.org/abs/1", "http://localhost:3000");
    CHECK(a.inbox_url == "http://localhost:3000/arxiv.org/inbox");
    CHECK(a.landing_host == "arxiv.org");
    CHECK(a.source == discovery::InboxRef::Source::generated);

    // port kept; distinct pages on one host map to one inbox
    auto b = discovery::generate_proxy_inbox("https://repo.example:8443/x",
                                             "http://localhost:3000/");
    CHECK(b.inbox_url == "http://localhost:3000/repo.example:8443/inbox");
    auto c = discovery::generate_proxy_inbox("https://arxiv.org/abs/2", "http://localhost:3000");
    CHECK(c.inbox_url == a.inbox_url);

    CHECK(discovery::generate_proxy_inbox("https://arxiv.org/abs/1", "http://localhost:3000") ==
          a);  // deterministic

    CHECK_THROWS_AS(discovery::generate_proxy_inbox("urn:uuid:1", "http://localhost:3000"),
                    discovery::InvalidUrl);
    CHECK_THROWS_AS(discovery::generate_proxy_inbox("https://arxiv.org/abs/1", "not a url"),
                    discovery::InvalidUrl);
}
