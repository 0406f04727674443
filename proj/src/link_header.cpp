// SPDX-License-Identifier: Apache-2.0

#include "valuenet/link_header.hpp"

#include <algorithm>
#include <cctype>

namespace valuenet::web {

namespace {

void skip_ows(std::string_view s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::vector<LinkValue> parse_link_header(std::string_view value) {
    std::vector<LinkValue> out;
    std::size_t i = 0;
    while (i < value.size()) {
        skip_ows(value, i);
        if (i >= value.size()) break;
        if (value[i] == ',') {
            ++i;
            continue;
        }
        if (value[i] != '<') {
            // skip to the next link-value rather than failing the whole field
            while (i < value.size() && value[i] != ',') ++i;
            continue;
        }
        ++i;
        LinkValue link;
        while (i < value.size() && value[i] != '>') link.target += value[i++];
        if (i >= value.size()) break;  // unterminated target
        ++i;

        // parameters until ',' or end
        while (i < value.size()) {
            skip_ows(value, i);
            if (i >= value.size() || value[i] == ',') break;
            if (value[i] == ';') {
                ++i;
                continue;
            }
            std::string name;
            while (i < value.size() && value[i] != '=' && value[i] != ';' && value[i] != ',') {
                name += value[i++];
            }
            while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
            std::string param_value;
            if (i < value.size() && value[i] == '=') {
                ++i;
                skip_ows(value, i);
                if (i < value.size() && value[i] == '"') {
                    ++i;
                    while (i < value.size() && value[i] != '"') {
                        if (value[i] == '\\' && i + 1 < value.size()) ++i;
                        param_value += value[i++];
                    }
                    if (i < value.size()) ++i;
                } else {
                    while (i < value.size() && value[i] != ';' && value[i] != ',') {
                        param_value += value[i++];
                    }
                    while (!param_value.empty() &&
                           (param_value.back() == ' ' || param_value.back() == '\t')) {
                        param_value.pop_back();
                    }
                }
            }
            if (!name.empty()) link.params.emplace(lower(name), param_value);
        }
        out.push_back(std::move(link));
        if (i < value.size() && value[i] == ',') ++i;
    }
    return out;
}

bool has_rel(const LinkValue& link, std::string_view relation) {
    auto it = link.params.find("rel");
    if (it == link.params.end()) return false;
    std::string_view rels = it->second;
    std::size_t i = 0;
    while (i < rels.size()) {
        while (i < rels.size() && rels[i] == ' ') ++i;
        std::size_t start = i;
        while (i < rels.size() && rels[i] != ' ') ++i;
        if (rels.substr(start, i - start) == relation) return true;
    }
    return false;
}

}  // namespace valuenet::web
