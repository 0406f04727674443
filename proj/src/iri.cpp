// SPDX-License-Identifier: Apache-2.0

#include "valuenet/iri.hpp"

#include <algorithm>
#include <cctype>

namespace valuenet::iri {

namespace {

bool scheme_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

bool scheme_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '+' || c == '-' || c == '.';
}

// Remove "." and ".." segments, RFC 3986 section 5.2.4.
std::string remove_dot_segments(std::string_view in) {
    std::string input(in);
    std::string output;
    while (!input.empty()) {
        if (input.rfind("../", 0) == 0) {
            input.erase(0, 3);
        } else if (input.rfind("./", 0) == 0) {
            input.erase(0, 2);
        } else if (input.rfind("/./", 0) == 0) {
            input.replace(0, 3, "/");
        } else if (input == "/.") {
            input = "/";
        } else if (input.rfind("/../", 0) == 0) {
            input.replace(0, 4, "/");
            auto pos = output.find_last_of('/');
            output.erase(pos == std::string::npos ? 0 : pos);
        } else if (input == "/..") {
            input = "/";
            auto pos = output.find_last_of('/');
            output.erase(pos == std::string::npos ? 0 : pos);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            auto start = input.front() == '/' ? std::size_t{1} : std::size_t{0};
            auto next = input.find('/', start);
            output += input.substr(0, next == std::string::npos ? input.size() : next);
            input.erase(0, next == std::string::npos ? input.size() : next);
        }
    }
    return output;
}

// RFC 3986 section 5.3 merge.
std::string merge_paths(const Components& base, std::string_view ref_path) {
    if (base.has_authority && base.path.empty()) return std::string("/") + std::string(ref_path);
    auto pos = base.path.find_last_of('/');
    if (pos == std::string::npos) return std::string(ref_path);
    return base.path.substr(0, pos + 1) + std::string(ref_path);
}

}  // namespace

std::optional<Components> split(std::string_view ref) {
    Components c;
    std::string_view rest = ref;

    // scheme
    if (!rest.empty() && scheme_start(rest.front())) {
        std::size_t i = 1;
        while (i < rest.size() && scheme_char(rest[i])) ++i;
        if (i < rest.size() && rest[i] == ':') {
            c.scheme.assign(rest.substr(0, i));
            std::transform(c.scheme.begin(), c.scheme.end(), c.scheme.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            rest.remove_prefix(i + 1);
        }
    }

    if (rest.rfind("//", 0) == 0) {
        c.has_authority = true;
        rest.remove_prefix(2);
        auto end = rest.find_first_of("/?#");
        c.authority.assign(rest.substr(0, end == std::string_view::npos ? rest.size() : end));
        rest.remove_prefix(std::min(rest.size(), end == std::string_view::npos ? rest.size() : end));
    }

    auto qpos = rest.find_first_of("?#");
    c.path.assign(rest.substr(0, qpos == std::string_view::npos ? rest.size() : qpos));
    rest.remove_prefix(std::min(rest.size(), qpos == std::string_view::npos ? rest.size() : qpos));

    if (!rest.empty() && rest.front() == '?') {
        c.has_query = true;
        rest.remove_prefix(1);
        auto fpos = rest.find('#');
        c.query.assign(rest.substr(0, fpos == std::string_view::npos ? rest.size() : fpos));
        rest.remove_prefix(std::min(rest.size(), fpos == std::string_view::npos ? rest.size() : fpos));
    }
    if (!rest.empty() && rest.front() == '#') {
        c.has_fragment = true;
        c.fragment.assign(rest.substr(1));
    }

    // control characters and spaces are never legal in an IRI reference
    for (char ch : ref) {
        if (static_cast<unsigned char>(ch) < 0x20 || ch == ' ') return std::nullopt;
    }
    return c;
}

std::string recompose(const Components& c) {
    std::string out;
    if (!c.scheme.empty()) {
        out += c.scheme;
        out += ':';
    }
    if (c.has_authority) {
        out += "//";
        out += c.authority;
    }
    out += c.path;
    if (c.has_query) {
        out += '?';
        out += c.query;
    }
    if (c.has_fragment) {
        out += '#';
        out += c.fragment;
    }
    return out;
}

bool is_absolute(std::string_view ref) {
    auto c = split(ref);
    return c && !c->scheme.empty();
}

bool is_http(std::string_view ref) {
    auto c = split(ref);
    if (!c || !c->has_authority || c->authority.empty()) return false;
    return c->scheme == "http" || c->scheme == "https";
}

std::string scheme_of(std::string_view ref) {
    auto c = split(ref);
    return c ? c->scheme : std::string{};
}

std::string host_of(std::string_view url) {
    auto c = split(url);
    if (!c || !c->has_authority) return {};
    std::string auth = c->authority;
    auto at = auth.find('@');
    if (at != std::string::npos) auth.erase(0, at + 1);
    // lowercase the host part only; the port digits are unaffected
    std::transform(auth.begin(), auth.end(), auth.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return auth;
}

std::string resolve(std::string_view base_ref, std::string_view ref) {
    auto r = split(ref);
    auto base = split(base_ref);
    if (!r) return std::string(ref);
    if (!base || base->scheme.empty()) return std::string(ref);

    Components t;
    if (!r->scheme.empty()) {
        t = *r;
        t.path = remove_dot_segments(t.path);
    } else {
        t.scheme = base->scheme;
        if (r->has_authority) {
            t.has_authority = true;
            t.authority = r->authority;
            t.path = remove_dot_segments(r->path);
            t.has_query = r->has_query;
            t.query = r->query;
        } else {
            t.has_authority = base->has_authority;
            t.authority = base->authority;
            if (r->path.empty()) {
                t.path = base->path;
                t.has_query = r->has_query ? true : base->has_query;
                t.query = r->has_query ? r->query : base->query;
            } else {
                t.path = r->path.front() == '/' ? remove_dot_segments(r->path)
                                                : remove_dot_segments(merge_paths(*base, r->path));
                t.has_query = r->has_query;
                t.query = r->query;
            }
        }
    }
    t.has_fragment = r->has_fragment;
    t.fragment = r->fragment;
    return recompose(t);
}

}  // namespace valuenet::iri
