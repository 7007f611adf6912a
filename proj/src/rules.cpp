#include "crs/rules.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <boost/regex.hpp>
#include "json.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace crs {

using json = nlohmann::json;

std::string_view to_string(Severity s) { return s == Severity::Strong ? "strong" : "mild"; }

std::string_view to_string(AppliesTo a) {
    switch (a) {
        case AppliesTo::Raw: return "raw";
        case AppliesTo::Folded: return "folded";
        case AppliesTo::Both: return "both";
    }
    return "both";
}

// ---------------------------------------------------------------------------
// Dialect check

namespace {

class DialectChecker {
public:
    explicit DialectChecker(std::string_view p) : p_(p) {}

    std::string run() {
        if (p_.empty()) return "empty pattern";
        alternation();
        if (error_.empty() && pos_ < p_.size()) fail("unbalanced ')'");
        return error_;
    }

private:
    bool done() const { return pos_ >= p_.size() || !error_.empty(); }
    void fail(const std::string& msg) {
        if (error_.empty()) error_ = msg + " at offset " + std::to_string(pos_);
    }

    void alternation() {
        sequence();
        while (!done() && p_[pos_] == '|') {
            ++pos_;
            sequence();
        }
    }

    void sequence() {
        while (!done() && p_[pos_] != '|' && p_[pos_] != ')') {
            bool quantifiable = atom();
            if (!error_.empty()) return;
            if (quantifier()) {
                if (!quantifiable) return fail("quantifier on zero-width assertion");
                if (!done() && (p_[pos_] == '?' || p_[pos_] == '+' || p_[pos_] == '*' || p_[pos_] == '{')) {
                    return fail("lazy, possessive or stacked quantifiers are not supported");
                }
            }
        }
    }

    bool quantifier() {
        if (done()) return false;
        char c = p_[pos_];
        if (c == '?' || c == '*' || c == '+') {
            ++pos_;
            return true;
        }
        if (c != '{') return false;
        auto close = p_.find('}', pos_);
        if (close == std::string_view::npos) {
            fail("unterminated '{'");
            return false;
        }
        std::string_view body = p_.substr(pos_ + 1, close - pos_ - 1);
        auto comma = body.find(',');
        auto digits = [](std::string_view s) {
            return !s.empty() && std::all_of(s.begin(), s.end(), [](char d) { return d >= '0' && d <= '9'; });
        };
        std::string_view lo = body.substr(0, comma);
        if (!digits(lo)) {
            fail("malformed {m,n} quantifier");
            return false;
        }
        if (comma != std::string_view::npos) {
            std::string_view hi = body.substr(comma + 1);
            if (!hi.empty()) {
                if (!digits(hi)) {
                    fail("malformed {m,n} quantifier");
                    return false;
                }
                if (std::stoul(std::string(hi)) < std::stoul(std::string(lo))) {
                    fail("{m,n} with m > n");
                    return false;
                }
            }
        }
        pos_ = close + 1;
        return true;
    }

    // Returns whether the atom may carry a quantifier.
    bool atom() {
        char c = p_[pos_];
        switch (c) {
            case '(': {
                if (p_.compare(pos_, 3, "(?:") != 0) {
                    if (p_.compare(pos_, 2, "(?") == 0) {
                        fail("lookaround and inline modifiers are not supported");
                    } else {
                        fail("capturing groups are not supported; use (?:...)");
                    }
                    return false;
                }
                pos_ += 3;
                alternation();
                if (!error_.empty()) return false;
                if (pos_ >= p_.size() || p_[pos_] != ')') {
                    fail("unterminated group");
                    return false;
                }
                ++pos_;
                return true;
            }
            case '[': return char_class();
            case '\\': return escape();
            case '^':
            case '$': fail("anchors are not supported"); return false;
            case '?':
            case '*':
            case '+':
            case '{': fail("quantifier without operand"); return false;
            case ']':
            case '}': fail("unescaped '" + std::string(1, c) + "'"); return false;
            default: ++pos_; return true;
        }
    }

    bool escape() {
        if (pos_ + 1 >= p_.size()) {
            fail("trailing backslash");
            return false;
        }
        char e = p_[pos_ + 1];
        pos_ += 2;
        if (e == 'b') return false;
        if (std::string_view("dDwWsStnr").find(e) != std::string_view::npos) return true;
        if (e == 'x') return hex_escape();
        if (e >= '0' && e <= '9') {
            pos_ -= 2;
            fail("backreferences are not supported");
            return false;
        }
        if ((e >= 'a' && e <= 'z') || (e >= 'A' && e <= 'Z')) {
            pos_ -= 2;
            fail(std::string("unsupported escape \\") + e);
            return false;
        }
        return true;  // escaped punctuation is a literal
    }

    bool hex_escape() {
        auto is_hex = [](char h) {
            return (h >= '0' && h <= '9') || (h >= 'a' && h <= 'f') || (h >= 'A' && h <= 'F');
        };
        if (pos_ + 2 > p_.size() || !is_hex(p_[pos_]) || !is_hex(p_[pos_ + 1])) {
            fail("malformed \\x escape");
            return false;
        }
        pos_ += 2;
        return true;
    }

    bool char_class() {
        ++pos_;
        if (pos_ < p_.size() && p_[pos_] == '^') ++pos_;
        std::size_t members = 0;
        while (pos_ < p_.size() && (p_[pos_] != ']' || members == 0)) {
            if (p_[pos_] == '\\') {
                if (pos_ + 1 >= p_.size()) break;
                char e = p_[pos_ + 1];
                if ((e >= 'a' && e <= 'z') || (e >= 'A' && e <= 'Z') || (e >= '0' && e <= '9')) {
                    if (std::string_view("dDwWstnr").find(e) == std::string_view::npos && e != 'x') {
                        fail(std::string("unsupported escape \\") + e + " in class");
                        return false;
                    }
                }
                pos_ += 2;
                if (e == 'x' && !hex_escape()) return false;
            } else if (p_.compare(pos_, 2, "[:") == 0 || p_.compare(pos_, 2, "[=") == 0 ||
                       p_.compare(pos_, 2, "[.") == 0) {
                fail("POSIX bracket expressions are not supported");
                return false;
            } else {
                ++pos_;
            }
            ++members;
        }
        if (pos_ >= p_.size()) {
            fail("unterminated character class");
            return false;
        }
        ++pos_;
        return true;
    }

    std::string_view p_;
    std::size_t pos_ = 0;
    std::string error_;
};

}  // namespace

std::string check_pattern_dialect(std::string_view pattern) { return DialectChecker(pattern).run(); }

// ---------------------------------------------------------------------------
// RuleSet

struct RuleSet::Compiled {
    std::vector<boost::regex> regexes;
};

RuleSet::RuleSet(std::string version, std::vector<RulePattern> patterns)
    : version_(std::move(version)), patterns_(std::move(patterns)) {
    if (version_.empty()) throw ParseError(0, "ruleset version must be nonempty");
    if (patterns_.empty()) throw ParseError(0, "ruleset must contain at least one rule");

    auto compiled = std::make_shared<Compiled>();
    std::set<std::string> ids;
    for (const auto& rule : patterns_) {
        if (rule.id.empty()) throw ParseError(0, "rule id must be nonempty");
        if (!ids.insert(rule.id).second) throw Error(ErrorCode::DuplicateRuleId, rule.id);
        if (rule.classes.empty()) throw ParseError(0, "rule " + rule.id + " has no classes");
        if (auto problem = check_pattern_dialect(rule.pattern); !problem.empty()) {
            throw Error(ErrorCode::InvalidPattern, rule.id + ": " + problem);
        }
        std::string source = rule.word_boundary ? "\\b(?:" + rule.pattern + ")\\b" : rule.pattern;
        try {
            compiled->regexes.emplace_back(source, boost::regex::perl | boost::regex::icase | boost::regex::optimize);
        } catch (const boost::regex_error& e) {
            throw Error(ErrorCode::InvalidPattern, rule.id + ": " + e.what());
        }
    }
    compiled_ = std::move(compiled);
}

std::vector<RuleMatch> RuleSet::scan(const NormalizedText& norm) const {
    std::vector<RuleMatch> out;
    const std::string& raw = norm.original();
    const std::string& folded = norm.folded();

    auto already = [&](const std::string& id, Span s) {
        return std::any_of(out.begin(), out.end(), [&](const RuleMatch& m) { return m.rule_id == id && m.span == s; });
    };
    auto add = [&](const RulePattern& rule, Span span) {
        if (span.empty() || already(rule.id, span)) return;
        out.push_back({rule.id, span, raw.substr(span.start, span.length()), rule.classes, rule.severity});
    };

    for (std::size_t r = 0; r < patterns_.size(); ++r) {
        const auto& rule = patterns_[r];
        const auto& re = compiled_->regexes[r];
        if (rule.applies_to != AppliesTo::Folded) {
            for (boost::sregex_iterator it(raw.begin(), raw.end(), re), end; it != end; ++it) {
                Span span{static_cast<std::size_t>(it->position()),
                          static_cast<std::size_t>(it->position() + it->length())};
                if (norm.in_code(span)) continue;
                add(rule, span);
            }
        }
        if (rule.applies_to != AppliesTo::Raw) {
            for (boost::sregex_iterator it(folded.begin(), folded.end(), re), end; it != end; ++it) {
                Span fspan{static_cast<std::size_t>(it->position()),
                           static_cast<std::size_t>(it->position() + it->length())};
                add(rule, norm.to_original(fspan));
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const RuleMatch& a, const RuleMatch& b) {
        return std::tie(a.span.start, a.span.end, a.rule_id) < std::tie(b.span.start, b.span.end, b.rule_id);
    });
    return out;
}

bool RuleSet::matches_any(const NormalizedText& norm) const {
    const std::string& raw = norm.original();
    const std::string& folded = norm.folded();
    for (std::size_t r = 0; r < patterns_.size(); ++r) {
        const auto& rule = patterns_[r];
        const auto& re = compiled_->regexes[r];
        if (rule.applies_to != AppliesTo::Folded) {
            for (boost::sregex_iterator it(raw.begin(), raw.end(), re), end; it != end; ++it) {
                Span span{static_cast<std::size_t>(it->position()),
                          static_cast<std::size_t>(it->position() + it->length())};
                if (!span.empty() && !norm.in_code(span)) return true;
            }
        }
        if (rule.applies_to != AppliesTo::Raw) {
            boost::smatch m;
            if (boost::regex_search(folded, m, re) && m.length() > 0) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(0, where + ": missing \"" + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(0, where + ": \"" + key + "\" has the wrong type");
    }
}

}  // namespace

RuleSet load_ruleset(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!doc.is_object()) throw ParseError(1, "ruleset must be a JSON object");

    auto version = required<std::string>(doc, "version", "ruleset");
    if (!doc.contains("rules") || !doc["rules"].is_array()) throw ParseError(0, "ruleset: \"rules\" must be an array");

    std::vector<RulePattern> patterns;
    std::size_t index = 0;
    for (const auto& r : doc["rules"]) {
        std::string where = "rules[" + std::to_string(index++) + "]";
        if (!r.is_object()) throw ParseError(0, where + " must be an object");
        RulePattern p;
        p.id = required<std::string>(r, "id", where);
        p.pattern = required<std::string>(r, "pattern", where);
        for (const auto& name : required<std::vector<std::string>>(r, "classes", where)) {
            auto c = parse_offence_class(name);
            if (!c) throw ParseError(0, where + ": unknown class \"" + name + "\"");
            p.classes.insert(*c);
        }
        auto severity = r.contains("severity") ? required<std::string>(r, "severity", where) : std::string("mild");
        if (severity == "mild") {
            p.severity = Severity::Mild;
        } else if (severity == "strong") {
            p.severity = Severity::Strong;
        } else {
            throw ParseError(0, where + ": severity must be \"mild\" or \"strong\"");
        }
        auto applies = r.contains("applies_to") ? required<std::string>(r, "applies_to", where) : std::string("both");
        if (applies == "raw") {
            p.applies_to = AppliesTo::Raw;
        } else if (applies == "folded") {
            p.applies_to = AppliesTo::Folded;
        } else if (applies == "both") {
            p.applies_to = AppliesTo::Both;
        } else {
            throw ParseError(0, where + ": applies_to must be raw, folded or both");
        }
        p.word_boundary = r.contains("word_boundary") ? required<bool>(r, "word_boundary", where) : true;
        patterns.push_back(std::move(p));
    }
    return RuleSet(std::move(version), std::move(patterns));
}

RuleSet load_ruleset_file(const std::string& path) {
    auto in = open_input(path);
    return load_ruleset(in);
}

ClassSet classes_of(const std::vector<RuleMatch>& matches) {
    ClassSet out;
    for (const auto& m : matches) out |= m.classes;
    return out;
}

bool is_rule_clean(std::string_view text, const RuleSet& rs, const NormalizeOptions& opts) {
    return !rs.matches_any(normalize(text, opts));
}

}  // namespace crs
