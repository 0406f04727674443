// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace valuenet::iri {

/// Components of an IRI reference, split per RFC 3986 appendix B.
struct Components {
    std::string scheme;     // without ':'
    std::string authority;  // [userinfo@]host[:port]
    std::string path;
    std::string query;      // without '?'
    std::string fragment;   // without '#'
    bool has_authority = false;
    bool has_query = false;
    bool has_fragment = false;
};

std::optional<Components> split(std::string_view ref);
std::string recompose(const Components& c);

/// True when the reference carries a scheme (RFC 3987 absolute IRI).
bool is_absolute(std::string_view ref);

/// True for http/https IRIs with a nonempty host; the form agents must have
/// so that their identity can be dereferenced.
bool is_http(std::string_view ref);

std::string scheme_of(std::string_view ref);

/// host[:port] of a URL, host lowercased, port kept when explicit.
/// Empty string when the reference has no authority.
std::string host_of(std::string_view url);

/// Resolve `ref` against absolute `base` (RFC 3986 section 5.2).
/// Returns `ref` unchanged when it is already absolute.
std::string resolve(std::string_view base, std::string_view ref);

}  // namespace valuenet::iri
