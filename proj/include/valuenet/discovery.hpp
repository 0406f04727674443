// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace valuenet::discovery {

inline constexpr std::string_view ldp_inbox_rel = "http://www.w3.org/ns/ldp#inbox";

/// Persistent-identifier families with a fixed HTTP prefix rule.
enum class PidScheme { doi, handle, pmid, pmc, arxiv, http_url };

std::string_view to_string(PidScheme s);
std::optional<PidScheme> pid_scheme_from_string(std::string_view name);

struct PidUrl {
    PidScheme scheme = PidScheme::http_url;
    std::string raw;       // the bare identifier, e.g. "10.5061/dryad.10hq7"
    std::string url_form;  // HTTP form derived from scheme + raw

    bool operator==(const PidUrl&) const = default;
};

class InvalidUrl : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Apply the prefix rule (DOI -> https://doi.org/<raw>, ...). For http_url
/// the raw value must already be an absolute http(s) URL.
PidUrl make_pid(PidScheme scheme, std::string raw);

/// Map a Scholix IDScheme string ("doi", "handle", "pmid", "pmc", "arxiv",
/// "url"/anything else with an explicit URL) onto a PidUrl. `id_url` wins
/// over the derived form when present.
std::optional<PidUrl> pid_from_scholix(std::string_view id_scheme, std::string raw,
                                       std::string id_url);

enum class ResolveError { too_many_redirects, timeout, network_error };

std::string_view to_string(ResolveError e);

/// Outcome of following one PID-URL's redirect chain.
struct ResolutionResult {
    PidUrl pid;
    std::string landing_url;           // set only on a final 200
    int hops = 0;                      // redirects followed
    std::chrono::milliseconds elapsed{0};
    int status = 0;                    // final HTTP status, 0 on transport failure
    std::optional<ResolveError> error; // carried, never thrown: batch robustness
    std::vector<std::pair<std::string, std::string>> final_headers;
    std::string final_body;

    bool ok() const { return status == 200 && !error; }
};

/// Where an artifact's notifications should be POSTed.
struct InboxRef {
    enum class Source { link_header, html_link, generated };

    std::string landing_host;  // host[:port] of the landing page
    std::string inbox_url;
    Source source = Source::generated;

    bool operator==(const InboxRef&) const = default;
};

std::string_view to_string(InboxRef::Source s);

/// Rewrites (host, port) to a different connect address while the request
/// keeps its original Host header; lets an offline harness stand in for an
/// entire network of hosts.
using HostOverride =
    std::function<std::optional<std::pair<std::string, int>>(const std::string& host, int port)>;

struct ResolveLimits {
    int max_hops = 10;
    std::chrono::seconds timeout{30};
};

class Resolver {
public:
    struct Options {
        ResolveLimits limits;
        bool cache = true;        // memoize per URL within a run
        bool fetch_body = false;  // keep the landing body for HTML-link discovery
        std::chrono::milliseconds politeness{0};  // per-host delay between requests
        HostOverride host_override;
    };

    Resolver() = default;
    explicit Resolver(Options options);

    /// Follow redirects manually (counting hops) until a 200 or a failure.
    ResolutionResult resolve(const PidUrl& pid);

    /// Resolve a batch with a bounded worker pool; results are returned in
    /// input order regardless of completion order.
    std::vector<ResolutionResult> resolve_all(const std::vector<PidUrl>& pids, int concurrency);

private:
    Options options_;
    std::map<std::string, ResolutionResult> cache_;
    std::map<std::string, std::chrono::steady_clock::time_point> last_request_;
    std::mutex mu_;

    ResolutionResult resolve_uncached(const PidUrl& pid);
    void be_polite(const std::string& host);
};

/// Inspect a landing response for the LDN inbox link relation. The first
/// matching Link header wins; an HTML <link> element is the fallback when a
/// body is available. Relative URLs resolve against the landing URL.
std::optional<InboxRef> discover_inbox(
    const std::string& landing_url,
    const std::vector<std::pair<std::string, std::string>>& response_headers,
    std::string_view response_body = {}, bool html_fallback = true);

/// The experiment's generation rule: proxy_base + "/" + landing host + "/inbox".
/// The port stays part of the host so local harnesses cannot collide.
InboxRef generate_proxy_inbox(const std::string& landing_url, const std::string& proxy_base);

}  // namespace valuenet::discovery
