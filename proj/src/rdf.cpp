// SPDX-License-Identifier: Apache-2.0

#include "valuenet/rdf.hpp"

#include "valuenet/iri.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace valuenet::rdf {

namespace {
constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema#";
constexpr std::string_view skolem_prefix = "urn:uuid:";

bool is_skolem(const Term& t) { return t.is_iri() && t.value.rfind(skolem_prefix, 0) == 0; }
}  // namespace

void Graph::insert(Triple t) {
    if (!contains(t)) triples_.push_back(std::move(t));
}

void Graph::merge(const Graph& other) {
    for (const auto& t : other.triples_) insert(t);
}

bool Graph::contains(const Triple& t) const {
    return std::find(triples_.begin(), triples_.end(), t) != triples_.end();
}

std::vector<Term> Graph::objects(const Term& s, std::string_view predicate_iri) const {
    std::vector<Term> out;
    for (const auto& t : triples_) {
        if (t.subject == s && t.predicate.is_iri() && t.predicate.value == predicate_iri) {
            out.push_back(t.object);
        }
    }
    return out;
}

std::optional<Term> Graph::object(const Term& s, std::string_view predicate_iri) const {
    for (const auto& t : triples_) {
        if (t.subject == s && t.predicate.is_iri() && t.predicate.value == predicate_iri) {
            return t.object;
        }
    }
    return std::nullopt;
}

std::vector<Term> Graph::subjects_with_type(std::string_view type_iri) const {
    std::vector<Term> out;
    for (const auto& t : triples_) {
        if (t.predicate.is_iri() && t.predicate.value == rdf_type && t.object.is_iri() &&
            t.object.value == type_iri && std::find(out.begin(), out.end(), t.subject) == out.end()) {
            out.push_back(t.subject);
        }
    }
    return out;
}

bool Graph::operator==(const Graph& other) const {
    if (triples_.size() != other.triples_.size()) return false;
    for (const auto& t : triples_) {
        if (!other.contains(t)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Isomorphism up to renaming of urn:uuid terms.
// ---------------------------------------------------------------------------

namespace {

Term rename(const Term& t, const std::map<std::string, std::string>& m) {
    if (!is_skolem(t)) return t;
    auto it = m.find(t.value);
    return it == m.end() ? t : Term::iri(it->second);
}

Triple rename(const Triple& t, const std::map<std::string, std::string>& m) {
    return Triple{rename(t.subject, m), rename(t.predicate, m), rename(t.object, m)};
}

bool match_skolems(const std::vector<std::string>& left, std::size_t idx,
                   const std::vector<std::string>& right, std::set<std::string>& used,
                   std::map<std::string, std::string>& mapping, const Graph& a, const Graph& b) {
    if (idx == left.size()) {
        for (const auto& t : a.triples()) {
            if (!b.contains(rename(t, mapping))) return false;
        }
        return true;
    }
    for (const auto& candidate : right) {
        if (used.count(candidate)) continue;
        mapping[left[idx]] = candidate;
        used.insert(candidate);
        if (match_skolems(left, idx + 1, right, used, mapping, a, b)) return true;
        used.erase(candidate);
        mapping.erase(left[idx]);
    }
    return false;
}

std::vector<std::string> skolems_of(const Graph& g) {
    std::vector<std::string> out;
    auto add = [&](const Term& t) {
        if (is_skolem(t) && std::find(out.begin(), out.end(), t.value) == out.end()) {
            out.push_back(t.value);
        }
    };
    for (const auto& t : g.triples()) {
        add(t.subject);
        add(t.predicate);
        add(t.object);
    }
    return out;
}

}  // namespace

bool isomorphic(const Graph& a, const Graph& b) {
    if (a.size() != b.size()) return false;
    auto sa = skolems_of(a);
    auto sb = skolems_of(b);
    if (sa.size() != sb.size()) return false;
    std::map<std::string, std::string> mapping;
    std::set<std::string> used;
    return match_skolems(sa, 0, sb, used, mapping, a, b);
}

// ---------------------------------------------------------------------------
// Turtle reader
// ---------------------------------------------------------------------------

namespace {

class TurtleReader {
public:
    explicit TurtleReader(std::string_view text) : text_(text) {}

    std::variant<Graph, TurtleError> run() {
        while (true) {
            skip_ws();
            if (eof()) break;
            if (!statement()) return error_;
        }
        return std::move(graph_);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    Graph graph_;
    TurtleError error_;
    std::map<std::string, std::string> prefixes_;
    std::string base_;

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }
    char peek2() const { return pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0'; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    bool fail(std::string message) {
        error_ = TurtleError{line_, col_, std::move(message)};
        return false;
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    bool word_ahead(std::string_view w, bool ci = false) const {
        if (text_.size() - pos_ < w.size()) return false;
        for (std::size_t i = 0; i < w.size(); ++i) {
            char a = text_[pos_ + i];
            char b = w[i];
            if (ci) {
                a = static_cast<char>(std::tolower(static_cast<unsigned char>(a)));
                b = static_cast<char>(std::tolower(static_cast<unsigned char>(b)));
            }
            if (a != b) return false;
        }
        return true;
    }

    void consume(std::size_t n) {
        for (std::size_t i = 0; i < n && !eof(); ++i) advance();
    }

    bool expect(char c) {
        if (peek() != c) return fail(std::string("expected '") + c + "'");
        advance();
        return true;
    }

    bool statement() {
        if (word_ahead("@prefix") || word_ahead("PREFIX", true)) return prefix_directive();
        if (word_ahead("@base") || word_ahead("BASE", true)) return base_directive();
        return triples();
    }

    bool prefix_directive() {
        bool sparql = !word_ahead("@prefix");
        consume(sparql ? 6 : 7);
        skip_ws();
        std::string label;
        while (!eof() && peek() != ':') {
            if (std::isspace(static_cast<unsigned char>(peek()))) return fail("bad prefix label");
            label += advance();
        }
        if (!expect(':')) return false;
        skip_ws();
        std::string iri;
        if (!iriref(iri)) return false;
        prefixes_[label] = iri;
        skip_ws();
        if (!sparql) return expect('.');
        if (peek() == '.') advance();  // tolerate a trailing dot either way
        return true;
    }

    bool base_directive() {
        bool sparql = !word_ahead("@base");
        consume(sparql ? 4 : 5);
        skip_ws();
        if (!iriref(base_)) return false;
        skip_ws();
        if (!sparql) return expect('.');
        if (peek() == '.') advance();
        return true;
    }

    bool triples() {
        Term subject;
        if (!term_iri(subject)) return false;
        if (!predicate_object_list(subject)) return false;
        skip_ws();
        return expect('.');
    }

    bool predicate_object_list(const Term& subject) {
        while (true) {
            skip_ws();
            Term predicate;
            if (peek() == 'a' && is_delim(peek_at(1))) {
                advance();
                predicate = Term::iri(std::string(rdf_type));
            } else if (!term_iri(predicate)) {
                return false;
            }
            // object list
            while (true) {
                skip_ws();
                Term object;
                if (!object_term(object)) return false;
                graph_.insert(subject, predicate, object);
                skip_ws();
                if (peek() == ',') {
                    advance();
                    continue;
                }
                break;
            }
            if (peek() == ';') {
                advance();
                skip_ws();
                if (peek() == '.' || peek() == ';') {
                    // trailing semicolons before the statement end are legal
                    while (peek() == ';') {
                        advance();
                        skip_ws();
                    }
                    return true;
                }
                continue;
            }
            return true;
        }
    }

    char peek_at(std::size_t off) const {
        return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
    }

    static bool is_delim(char c) {
        return c == '\0' || c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '<' ||
               c == '"' || c == '\'' || c == '#';
    }

    bool object_term(Term& out) {
        char c = peek();
        if (c == '<' || is_pname_start(c)) return term_iri(out);
        if (c == '"' || c == '\'') return literal_term(out);
        if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            return numeric_term(out);
        }
        if (word_ahead("true") && is_delim(peek_at(4))) {
            consume(4);
            out = Term::literal("true", {}, std::string(xsd_ns) + "boolean");
            return true;
        }
        if (word_ahead("false") && is_delim(peek_at(5))) {
            consume(5);
            out = Term::literal("false", {}, std::string(xsd_ns) + "boolean");
            return true;
        }
        if (c == '[') return fail("blank nodes are not part of the notification profile");
        if (c == '(') return fail("collections are not part of the notification profile");
        return fail("expected an IRI or literal");
    }

    static bool is_pname_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == ':';
    }

    bool term_iri(Term& out) {
        skip_ws();
        if (peek() == '<') {
            std::string iri;
            if (!iriref(iri)) return false;
            out = Term::iri(std::move(iri));
            return true;
        }
        if (peek() == '_' && peek2() == ':') return fail("blank node labels are not supported");
        if (!is_pname_start(peek())) return fail("expected an IRI");
        return prefixed_name(out);
    }

    bool iriref(std::string& out) {
        if (!expect('<')) return false;
        std::string raw;
        while (true) {
            if (eof()) return fail("unterminated IRI");
            char c = advance();
            if (c == '>') break;
            if (c == '\\') {
                if (!unicode_escape(raw)) return false;
            } else if (static_cast<unsigned char>(c) <= 0x20) {
                return fail("whitespace inside IRI");
            } else {
                raw += c;
            }
        }
        out = base_.empty() ? raw : iri::resolve(base_, raw);
        if (out.empty()) return fail("empty IRI");
        return true;
    }

    bool unicode_escape(std::string& out) {
        if (eof()) return fail("dangling escape");
        char kind = advance();
        int digits = kind == 'u' ? 4 : kind == 'U' ? 8 : -1;
        if (digits < 0) return fail("unsupported escape in IRI");
        unsigned long cp = 0;
        for (int i = 0; i < digits; ++i) {
            if (eof()) return fail("truncated \\u escape");
            char c = advance();
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<unsigned long>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<unsigned long>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<unsigned long>(c - 'A' + 10);
            else return fail("bad hex digit in \\u escape");
        }
        append_utf8(out, cp);
        return true;
    }

    static void append_utf8(std::string& out, unsigned long cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    bool prefixed_name(Term& out) {
        std::string label;
        while (!eof() && peek() != ':') {
            char c = peek();
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                  c == '.')) {
                return fail("bad prefixed name");
            }
            label += advance();
        }
        if (!expect(':')) return false;
        std::string local;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                c == '%' || static_cast<unsigned char>(c) >= 0x80) {
                local += advance();
            } else if (c == '\\') {
                advance();
                if (eof()) return fail("dangling escape in local name");
                local += advance();  // PN_LOCAL_ESC: take the next char literally
            } else {
                break;
            }
        }
        while (!local.empty() && local.back() == '.') {  // trailing dot ends the statement
            local.pop_back();
            --pos_;
            --col_;
        }
        auto it = prefixes_.find(label);
        if (it == prefixes_.end()) return fail("unknown prefix '" + label + ":'");
        out = Term::iri(it->second + local);
        return true;
    }

    bool literal_term(Term& out) {
        char quote = peek();
        std::string value;
        bool long_form = word_ahead(quote == '"' ? "\"\"\"" : "'''");
        if (long_form) {
            consume(3);
            std::string closer(3, quote);
            while (!word_ahead(closer)) {
                if (eof()) return fail("unterminated long string");
                char c = advance();
                if (c == '\\') {
                    if (!string_escape(value)) return false;
                } else {
                    value += c;
                }
            }
            consume(3);
        } else {
            advance();
            while (true) {
                if (eof()) return fail("unterminated string");
                char c = advance();
                if (c == quote) break;
                if (c == '\n') return fail("newline in short string");
                if (c == '\\') {
                    if (!string_escape(value)) return false;
                } else {
                    value += c;
                }
            }
        }
        std::string lang, datatype;
        if (peek() == '@') {
            advance();
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) {
                lang += advance();
            }
            if (lang.empty()) return fail("empty language tag");
        } else if (peek() == '^' && peek2() == '^') {
            consume(2);
            Term dt;
            if (!term_iri(dt)) return false;
            datatype = dt.value;
        }
        out = Term::literal(std::move(value), std::move(lang), std::move(datatype));
        return true;
    }

    bool string_escape(std::string& out) {
        if (eof()) return fail("dangling escape");
        char c = peek();
        switch (c) {
            case 't': out += '\t'; advance(); return true;
            case 'b': out += '\b'; advance(); return true;
            case 'n': out += '\n'; advance(); return true;
            case 'r': out += '\r'; advance(); return true;
            case 'f': out += '\f'; advance(); return true;
            case '"': out += '"'; advance(); return true;
            case '\'': out += '\''; advance(); return true;
            case '\\': out += '\\'; advance(); return true;
            case 'u':
            case 'U': return unicode_escape(out);
            default: return fail("unsupported string escape");
        }
    }

    bool numeric_term(Term& out) {
        std::string text;
        if (peek() == '+' || peek() == '-') text += advance();
        bool has_digits = false, has_dot = false, has_exp = false;
        while (!eof()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                has_digits = true;
                text += advance();
            } else if (c == '.' && !has_dot && !has_exp &&
                       std::isdigit(static_cast<unsigned char>(peek_at(1)))) {
                has_dot = true;
                text += advance();
            } else if ((c == 'e' || c == 'E') && has_digits && !has_exp) {
                has_exp = true;
                text += advance();
                if (peek() == '+' || peek() == '-') text += advance();
            } else {
                break;
            }
        }
        if (!has_digits) return fail("malformed number");
        std::string dt = std::string(xsd_ns) +
                         (has_exp ? "double" : has_dot ? "decimal" : "integer");
        out = Term::literal(std::move(text), {}, std::move(dt));
        return true;
    }
};

}  // namespace

std::variant<Graph, TurtleError> parse_turtle(std::string_view text) {
    return TurtleReader(text).run();
}

// ---------------------------------------------------------------------------
// Turtle writer
// ---------------------------------------------------------------------------

namespace {

std::string escape_literal(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string write_term(const Term& t,
                       const std::vector<std::pair<std::string, std::string>>& prefixes,
                       bool allow_a) {
    if (t.is_iri()) {
        if (allow_a && t.value == rdf_type) return "a";
        for (const auto& [label, ns] : prefixes) {
            if (t.value.rfind(ns, 0) == 0) {
                std::string local = t.value.substr(ns.size());
                // only compact clean local names; anything else stays absolute
                bool clean = !local.empty();
                for (char c : local) {
                    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
                        clean = false;
                        break;
                    }
                }
                if (clean) return label + ":" + local;
            }
        }
        return "<" + t.value + ">";
    }
    std::string out = "\"" + escape_literal(t.value) + "\"";
    if (!t.lang.empty()) {
        out += "@" + t.lang;
    } else if (!t.datatype.empty()) {
        out += "^^<" + t.datatype + ">";
    }
    return out;
}

}  // namespace

std::string to_turtle(const Graph& g,
                      const std::vector<std::pair<std::string, std::string>>& prefixes) {
    std::ostringstream out;
    for (const auto& [label, ns] : prefixes) {
        out << "@prefix " << label << ": <" << ns << "> .\n";
    }
    if (!prefixes.empty()) out << "\n";

    std::vector<Term> order;
    for (const auto& t : g.triples()) {
        if (std::find(order.begin(), order.end(), t.subject) == order.end()) {
            order.push_back(t.subject);
        }
    }
    bool first_group = true;
    for (const auto& subject : order) {
        if (!first_group) out << "\n";
        first_group = false;
        out << write_term(subject, prefixes, false) << " ";
        bool first_arc = true;
        // group repeated predicates into object lists, preserving first-seen order
        std::vector<Term> preds;
        for (const auto& t : g.triples()) {
            if (t.subject == subject &&
                std::find(preds.begin(), preds.end(), t.predicate) == preds.end()) {
                preds.push_back(t.predicate);
            }
        }
        for (const auto& pred : preds) {
            if (!first_arc) out << " ;\n  ";
            first_arc = false;
            out << write_term(pred, prefixes, true) << " ";
            bool first_obj = true;
            for (const auto& t : g.triples()) {
                if (t.subject == subject && t.predicate == pred) {
                    if (!first_obj) out << ", ";
                    first_obj = false;
                    out << write_term(t.object, prefixes, false);
                }
            }
        }
        out << " .\n";
    }
    return out.str();
}

}  // namespace valuenet::rdf
