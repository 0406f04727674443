// SPDX-License-Identifier: Apache-2.0

#include "valuenet/discovery.hpp"

#include "valuenet/iri.hpp"
#include "valuenet/link_header.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

namespace valuenet::discovery {

std::string_view to_string(PidScheme s) {
    switch (s) {
        case PidScheme::doi: return "DOI";
        case PidScheme::handle: return "HANDLE";
        case PidScheme::pmid: return "PMID";
        case PidScheme::pmc: return "PMC";
        case PidScheme::arxiv: return "ARXIV";
        case PidScheme::http_url: return "HTTPURL";
    }
    return "?";
}

std::optional<PidScheme> pid_scheme_from_string(std::string_view name) {
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "doi") return PidScheme::doi;
    if (lowered == "handle" || lowered == "hdl") return PidScheme::handle;
    if (lowered == "pmid" || lowered == "pubmed") return PidScheme::pmid;
    if (lowered == "pmc" || lowered == "pmcid") return PidScheme::pmc;
    if (lowered == "arxiv") return PidScheme::arxiv;
    if (lowered == "httpurl" || lowered == "url" || lowered == "http") return PidScheme::http_url;
    return std::nullopt;
}

std::string_view to_string(ResolveError e) {
    switch (e) {
        case ResolveError::too_many_redirects: return "too_many_redirects";
        case ResolveError::timeout: return "timeout";
        case ResolveError::network_error: return "network_error";
    }
    return "?";
}

std::string_view to_string(InboxRef::Source s) {
    switch (s) {
        case InboxRef::Source::link_header: return "LinkHeader";
        case InboxRef::Source::html_link: return "HtmlLink";
        case InboxRef::Source::generated: return "Generated";
    }
    return "?";
}

PidUrl make_pid(PidScheme scheme, std::string raw) {
    PidUrl pid;
    pid.scheme = scheme;
    pid.raw = raw;
    switch (scheme) {
        case PidScheme::doi: pid.url_form = "https://doi.org/" + raw; break;
        case PidScheme::handle: pid.url_form = "http://hdl.handle.net/" + raw; break;
        case PidScheme::pmid: pid.url_form = "https://pubmed.ncbi.nlm.nih.gov/" + raw; break;
        case PidScheme::pmc: pid.url_form = "https://www.ncbi.nlm.nih.gov/pmc/articles/" + raw;
            break;
        case PidScheme::arxiv: pid.url_form = "https://arxiv.org/abs/" + raw; break;
        case PidScheme::http_url:
            if (!iri::is_http(raw)) {
                throw InvalidUrl("not an absolute http(s) URL: '" + raw + "'");
            }
            pid.url_form = raw;
            break;
    }
    return pid;
}

std::optional<PidUrl> pid_from_scholix(std::string_view id_scheme, std::string raw,
                                       std::string id_url) {
    auto scheme = pid_scheme_from_string(id_scheme);
    if (!id_url.empty() && iri::is_http(id_url)) {
        PidUrl pid;
        pid.scheme = scheme.value_or(PidScheme::http_url);
        pid.raw = raw.empty() ? id_url : raw;
        pid.url_form = std::move(id_url);
        return pid;
    }
    if (!scheme || raw.empty()) return std::nullopt;
    if (*scheme == PidScheme::http_url && !iri::is_http(raw)) return std::nullopt;
    return make_pid(*scheme, std::move(raw));
}

// ---------------------------------------------------------------------------
// Resolver
// ---------------------------------------------------------------------------

namespace {

struct Endpoint {
    std::string scheme;
    std::string host;       // without port
    int port = 0;           // 0 when implied by scheme
    std::string path_query; // path + optional ?query
    std::string host_port;  // original host[:port] for the Host header
};

std::optional<Endpoint> split_url(const std::string& url) {
    auto c = iri::split(url);
    if (!c || !c->has_authority || (c->scheme != "http" && c->scheme != "https")) {
        return std::nullopt;
    }
    Endpoint e;
    e.scheme = c->scheme;
    std::string auth = c->authority;
    auto at = auth.find('@');
    if (at != std::string::npos) auth.erase(0, at + 1);
    e.host_port = auth;
    auto bracket = auth.rfind(']');
    auto colon = auth.rfind(':');
    if (colon != std::string::npos && (bracket == std::string::npos || colon > bracket)) {
        e.host = auth.substr(0, colon);
        try {
            e.port = std::stoi(auth.substr(colon + 1));
        } catch (...) {
            return std::nullopt;
        }
    } else {
        e.host = auth;
    }
    if (e.port == 0) e.port = e.scheme == "https" ? 443 : 80;
    e.path_query = c->path.empty() ? "/" : c->path;
    if (c->has_query) e.path_query += "?" + c->query;
    return e;
}

bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

}  // namespace

Resolver::Resolver(Options options) : options_(std::move(options)) {}

void Resolver::be_polite(const std::string& host) {
    if (options_.politeness.count() == 0) return;
    std::chrono::steady_clock::time_point wait_until;
    {
        std::lock_guard lock(mu_);
        auto now = std::chrono::steady_clock::now();
        auto it = last_request_.find(host);
        wait_until = it == last_request_.end() ? now : it->second + options_.politeness;
        if (wait_until < now) wait_until = now;
        last_request_[host] = wait_until;
    }
    std::this_thread::sleep_until(wait_until);
}

ResolutionResult Resolver::resolve(const PidUrl& pid) {
    if (options_.cache) {
        std::lock_guard lock(mu_);
        auto it = cache_.find(pid.url_form);
        if (it != cache_.end()) {
            auto hit = it->second;
            hit.pid = pid;
            return hit;
        }
    }
    auto result = resolve_uncached(pid);
    if (options_.cache) {
        std::lock_guard lock(mu_);
        cache_.emplace(pid.url_form, result);
    }
    return result;
}

ResolutionResult Resolver::resolve_uncached(const PidUrl& pid) {
    ResolutionResult result;
    result.pid = pid;
    const auto started = std::chrono::steady_clock::now();
    auto finish = [&]() -> ResolutionResult& {
        result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return result;
    };

    std::string current = pid.url_form;
    while (true) {
        auto endpoint = split_url(current);
        if (!endpoint) {
            result.error = ResolveError::network_error;
            return finish();
        }
        be_polite(endpoint->host);

        std::string connect_host = endpoint->host;
        int connect_port = endpoint->port;
        std::string connect_scheme = endpoint->scheme;
        if (options_.host_override) {
            if (auto mapped = options_.host_override(endpoint->host, endpoint->port)) {
                connect_host = mapped->first;
                connect_port = mapped->second;
                connect_scheme = "http";  // local stand-ins speak plain http
            }
        }

        httplib::Client client(connect_scheme + "://" + connect_host + ":" +
                               std::to_string(connect_port));
        client.set_follow_location(false);  // hops are counted here
        client.set_connection_timeout(options_.limits.timeout);
        client.set_read_timeout(options_.limits.timeout);
        client.enable_server_certificate_verification(true);

        httplib::Headers headers{{"Host", endpoint->host_port},
                                 {"User-Agent", "valuenet-resolver"}};
        auto response = client.Get(endpoint->path_query, headers);
        if (!response) {
            result.error = response.error() == httplib::Error::ConnectionTimeout
                               ? ResolveError::timeout
                               : ResolveError::network_error;
            return finish();
        }
        result.status = response->status;
        if (is_redirect(response->status)) {
            auto location = response->get_header_value("Location");
            if (location.empty()) return finish();
            if (result.hops + 1 > options_.limits.max_hops) {
                result.error = ResolveError::too_many_redirects;
                result.status = response->status;
                return finish();
            }
            ++result.hops;
            current = iri::resolve(current, location);
            continue;
        }
        if (response->status == 200) {
            result.landing_url = current;
            for (const auto& [name, value] : response->headers) {
                result.final_headers.emplace_back(name, value);
            }
            if (options_.fetch_body) result.final_body = response->body;
        }
        return finish();
    }
}

std::vector<ResolutionResult> Resolver::resolve_all(const std::vector<PidUrl>& pids,
                                                    int concurrency) {
    std::vector<ResolutionResult> results(pids.size());
    if (pids.empty()) return results;
    concurrency = std::max(1, std::min<int>(concurrency, static_cast<int>(pids.size())));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(concurrency));
    for (int w = 0; w < concurrency; ++w) {
        workers.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= pids.size()) return;
                results[i] = resolve(pids[i]);
            }
        });
    }
    for (auto& t : workers) t.join();
    return results;
}

// ---------------------------------------------------------------------------
// Inbox discovery
// ---------------------------------------------------------------------------

namespace {

// Minimal scan for <link rel="..." href="..."> elements; enough for the
// LDN discovery fallback without a full HTML parser.
std::optional<std::string> html_link_target(std::string_view body, std::string_view relation) {
    std::string lowered(body);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t pos = 0;
    while ((pos = lowered.find("<link", pos)) != std::string::npos) {
        auto end = body.find('>', pos);
        if (end == std::string::npos) break;
        std::string_view tag = body.substr(pos, end - pos + 1);
        std::string_view tag_lower = std::string_view(lowered).substr(pos, end - pos + 1);

        auto attr = [&](std::string_view name) -> std::optional<std::string> {
            std::size_t a = 0;
            while ((a = tag_lower.find(name, a)) != std::string_view::npos) {
                std::size_t eq = a + name.size();
                while (eq < tag.size() && (tag[eq] == ' ' || tag[eq] == '\t')) ++eq;
                if (eq >= tag.size() || tag[eq] != '=') {
                    a += name.size();
                    continue;
                }
                ++eq;
                while (eq < tag.size() && (tag[eq] == ' ' || tag[eq] == '\t')) ++eq;
                if (eq >= tag.size()) return std::nullopt;
                char quote = tag[eq];
                if (quote == '"' || quote == '\'') {
                    auto close = tag.find(quote, eq + 1);
                    if (close == std::string_view::npos) return std::nullopt;
                    return std::string(tag.substr(eq + 1, close - eq - 1));
                }
                std::size_t stop = eq;
                while (stop < tag.size() && tag[stop] != ' ' && tag[stop] != '>' &&
                       tag[stop] != '/') {
                    ++stop;
                }
                return std::string(tag.substr(eq, stop - eq));
            }
            return std::nullopt;
        };

        auto rel = attr("rel");
        auto href = attr("href");
        if (rel && href) {
            std::size_t i = 0;
            while (i < rel->size()) {
                while (i < rel->size() && (*rel)[i] == ' ') ++i;
                std::size_t start = i;
                while (i < rel->size() && (*rel)[i] != ' ') ++i;
                if (std::string_view(*rel).substr(start, i - start) == relation) return href;
            }
        }
        pos = end + 1;
    }
    return std::nullopt;
}

}  // namespace

std::optional<InboxRef> discover_inbox(
    const std::string& landing_url,
    const std::vector<std::pair<std::string, std::string>>& response_headers,
    std::string_view response_body, bool html_fallback) {
    const std::string host = iri::host_of(landing_url);
    for (const auto& [name, value] : response_headers) {
        std::string lowered(name);
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lowered != "link") continue;
        for (const auto& link : web::parse_link_header(value)) {
            if (web::has_rel(link, ldp_inbox_rel)) {
                return InboxRef{host, iri::resolve(landing_url, link.target),
                                InboxRef::Source::link_header};
            }
        }
    }
    if (html_fallback && !response_body.empty()) {
        if (auto href = html_link_target(response_body, ldp_inbox_rel)) {
            return InboxRef{host, iri::resolve(landing_url, *href), InboxRef::Source::html_link};
        }
    }
    return std::nullopt;
}

InboxRef generate_proxy_inbox(const std::string& landing_url, const std::string& proxy_base) {
    const std::string host = iri::host_of(landing_url);
    if (host.empty()) throw InvalidUrl("landing URL has no host: '" + landing_url + "'");
    if (!iri::is_http(proxy_base)) {
        throw InvalidUrl("proxy base must be an absolute http(s) URL: '" + proxy_base + "'");
    }
    std::string base = proxy_base;
    while (!base.empty() && base.back() == '/') base.pop_back();
    return InboxRef{host, base + "/" + host + "/inbox", InboxRef::Source::generated};
}

}  // namespace valuenet::discovery
