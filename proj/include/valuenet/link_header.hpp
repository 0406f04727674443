// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace valuenet::web {

/// One link-value from an RFC 8288 Link header field.
struct LinkValue {
    std::string target;                          // the URI-Reference inside <>
    std::map<std::string, std::string> params;   // names lowercased, values unquoted
};

/// Parse a Link header field value. Tolerates parameter reordering, optional
/// whitespace, quoted or bare parameter values, and multiple comma-separated
/// link-values. Unparseable stretches are skipped rather than fatal.
std::vector<LinkValue> parse_link_header(std::string_view value);

/// True when the link-value's rel contains `relation` as one of its
/// space-separated members.
bool has_rel(const LinkValue& link, std::string_view relation);

}  // namespace valuenet::web
