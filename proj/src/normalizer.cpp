#include "crs/normalizer.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <algorithm>

namespace crs {

std::string_view to_string(Platform p) {
    switch (p) {
        case Platform::GitHub: return "github";
        case Platform::Gitter: return "gitter";
        case Platform::Slack: return "slack";
        case Platform::StackOverflow: return "stackoverflow";
        case Platform::Other: return "other";
    }
    return "other";
}

std::optional<Platform> parse_platform(std::string_view name) {
    for (auto p : {Platform::GitHub, Platform::Gitter, Platform::Slack, Platform::StackOverflow, Platform::Other}) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SubstitutionTable

SubstitutionTable SubstitutionTable::defaults() {
    SubstitutionTable t;
    t.add('$', 's');
    t.add('@', 'a');
    t.add('0', 'o');
    t.add('1', 'i');
    t.add('3', 'e');
    t.add('!', 'i');
    t.add('+', 't');
    return t;
}

void SubstitutionTable::add(char from, char to) {
    auto f = static_cast<unsigned char>(from);
    auto t = static_cast<unsigned char>(to);
    if (f >= 0x80 || t >= 0x80 || t == 0) {
        throw Error(ErrorCode::InvalidConfig, "substitutions must map ASCII to ASCII");
    }
    if (to >= 'A' && to <= 'Z') to = static_cast<char>(to - 'A' + 'a');
    const char previous = map_[f];
    map_[f] = to;
    // closure: no target may itself be substituted
    for (int c = 0; c < 256; ++c) {
        if (map_[c] != 0 && substitutes(map_[c])) {
            const char bad = map_[c];
            map_[f] = previous;
            throw Error(ErrorCode::InvalidConfig,
                        std::string("substitution table is not closed: '") + bad + "' is both a source and a target");
        }
    }
}

SubstitutionTable SubstitutionTable::load(std::istream& in) {
    SubstitutionTable t;
    for (const auto& row : read_tsv(in, 2, 2)) {
        if (row.fields[0].size() != 1 || row.fields[1].size() != 1) {
            throw ParseError(row.line, "substitutions are single ASCII characters");
        }
        try {
            t.add(row.fields[0][0], row.fields[1][0]);
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    }
    return t;
}

std::string SubstitutionTable::sources_of(char target) const {
    std::string out;
    for (int c = 0; c < 256; ++c) {
        if (map_[c] == target) out.push_back(static_cast<char>(c));
    }
    return out;
}

std::size_t SubstitutionTable::size() const noexcept {
    return static_cast<std::size_t>(std::count_if(std::begin(map_), std::end(map_), [](char c) { return c != 0; }));
}

// ---------------------------------------------------------------------------
// UTF-8

namespace {

/// Length of the UTF-8 sequence starting at s[i], or 0 when malformed.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i, char32_t* cp_out = nullptr) {
    auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
        if (cp_out) *cp_out = b0;
        return 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return 0;
    if (cp >= 0xD800 && cp <= 0xDFFF) return 0;
    if (cp > 0x10FFFF) return 0;
    if (cp_out) *cp_out = cp;
    return len;
}

bool is_unicode_space(char32_t cp) {
    return cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 || cp == 0x2029 ||
           cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

/// Non-ASCII code points that act as punctuation or symbols rather than
/// letters. An approximation without a Unicode database.
bool is_unicode_symbol(char32_t cp) {
    return (cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x2BFF) ||
           (cp >= 0x2E00 && cp <= 0x2E7F) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFE30 && cp <= 0xFE4F) ||
           (cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0x1F000 && cp <= 0x1FAFF);
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_sentence_punct(char c) {
    return c == '!' || c == '?' || c == '.' || c == ',' || c == ';' || c == ':';
}

enum class UnitKind { Letter, Digit, Space, Symbol, OtherWord, Apostrophe };

struct Unit {
    std::string text;
    Span original;
    UnitKind kind = UnitKind::Symbol;
    bool code = false;
};

UnitKind classify_ascii(char c) {
    if (c >= 'a' && c <= 'z') return UnitKind::Letter;
    if (c >= 'A' && c <= 'Z') return UnitKind::Letter;
    if (c >= '0' && c <= '9') return UnitKind::Digit;
    if (c == '_') return UnitKind::OtherWord;
    if (c == '\'') return UnitKind::Apostrophe;
    if (is_ascii_space(c)) return UnitKind::Space;
    return UnitKind::Symbol;
}

UnitKind classify_codepoint(char32_t cp) {
    if (cp == 0x2019) return UnitKind::Apostrophe;
    if (is_unicode_space(cp)) return UnitKind::Space;
    if (is_unicode_symbol(cp)) return UnitKind::Symbol;
    return UnitKind::OtherWord;
}

bool is_word_kind(UnitKind k) {
    return k == UnitKind::Letter || k == UnitKind::Digit || k == UnitKind::OtherWord;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
    for (std::size_t i = 0; i < s.size();) {
        auto len = utf8_sequence_length(s, i);
        if (len == 0) return false;
        i += len;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Code stripping

std::vector<Span> find_code_spans(std::string_view body) {
    std::vector<Span> spans;
    std::size_t i = 0;
    const std::size_t n = body.size();
    while (i < n) {
        if (body.compare(i, 3, "```") == 0) {
            auto close = body.find("```", i + 3);
            if (close == std::string_view::npos) {
                i += 3;  // unpaired fence stays verbatim
                continue;
            }
            spans.push_back({i, close + 3});
            i = close + 3;
        } else if (body[i] == '`') {
            auto close = body.find('`', i + 1);
            if (close == std::string_view::npos) {
                ++i;
                continue;
            }
            spans.push_back({i, close + 1});
            i = close + 1;
        } else {
            ++i;
        }
    }
    return spans;
}

std::string strip_code(std::string_view body) {
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    for (const auto& s : find_code_spans(body)) {
        out.append(body.substr(pos, s.start - pos));
        out.push_back(' ');
        pos = s.end;
    }
    out.append(body.substr(pos));
    return out;
}

// ---------------------------------------------------------------------------
// NormalizedText

Span NormalizedText::to_original(Span folded_bytes) const {
    auto by_begin = [](const OffsetEntry& e, std::size_t b) { return e.folded_begin < b; };
    auto first = std::lower_bound(offsets_.begin(), offsets_.end(), folded_bytes.start, by_begin);
    if (first == offsets_.end()) return {original_.size(), original_.size()};
    if (folded_bytes.empty()) return {first->original.start, first->original.start};
    auto last = std::lower_bound(first, offsets_.end(), folded_bytes.end, by_begin);
    --last;
    return {first->original.start, last->original.end};
}

bool NormalizedText::in_code(Span original_bytes) const noexcept {
    return std::any_of(code_spans_.begin(), code_spans_.end(),
                       [&](const Span& c) { return c.overlaps(original_bytes); });
}

NormalizedText normalize(std::string_view body, const NormalizeOptions& opts) {
    if (body.size() > kMaxBodyBytes) {
        throw Error(ErrorCode::InputTooLarge,
                    std::to_string(body.size()) + " bytes exceeds limit of " + std::to_string(kMaxBodyBytes));
    }
    if (!is_valid_utf8(body)) throw Error(ErrorCode::InvalidEncoding, "input is not valid UTF-8");

    static const SubstitutionTable kDefaultTable = SubstitutionTable::defaults();
    const SubstitutionTable& table = opts.substitutions ? *opts.substitutions : kDefaultTable;

    NormalizedText out;
    out.original_ = std::string(body);
    if (opts.strip_code) out.code_spans_ = find_code_spans(body);

    // 1. split into characters, blanking code ranges
    std::vector<Unit> units;
    units.reserve(body.size());
    auto code_it = out.code_spans_.begin();
    for (std::size_t i = 0; i < body.size();) {
        if (code_it != out.code_spans_.end() && code_it->start == i) {
            units.push_back({" ", *code_it, UnitKind::Space, true});
            i = code_it->end;
            ++code_it;
            continue;
        }
        char32_t cp = 0;
        auto len = utf8_sequence_length(body, i, &cp);
        Unit u;
        u.original = {i, i + len};
        if (len == 1) {
            char c = body[i];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            u.text = std::string(1, c);
            u.kind = classify_ascii(c);
        } else {
            u.text = std::string(body.substr(i, len));
            u.kind = classify_codepoint(cp);
        }
        units.push_back(std::move(u));
        i += len;
    }

    // 2. substitution. A maximal chain of substitutable characters folds when
    // it touches a letter, or when it stands alone as a word and is not purely
    // numeric ("@$$"). Chains made only of sentence punctuation fold only when
    // a letter follows, so "idiot!" keeps its '!' while "sh!t" folds.
    auto substitutable = [&](const Unit& u) {
        return !u.code && u.text.size() == 1 && table.substitutes(u.text[0]);
    };
    for (std::size_t a = 0; a < units.size();) {
        if (!substitutable(units[a])) {
            ++a;
            continue;
        }
        std::size_t b = a;
        bool punct_only = true;
        bool has_symbol = false;
        while (b < units.size() && substitutable(units[b])) {
            char c = units[b].text[0];
            punct_only = punct_only && is_sentence_punct(c);
            has_symbol = has_symbol || (!is_sentence_punct(c) && !(c >= '0' && c <= '9'));
            ++b;
        }
        auto joins_word = [&](std::size_t k) {
            return is_word_kind(units[k].kind) || units[k].kind == UnitKind::Apostrophe;
        };
        bool letter_before = a > 0 && units[a - 1].kind == UnitKind::Letter;
        bool letter_after = b < units.size() && units[b].kind == UnitKind::Letter;
        bool standalone = (a == 0 || !joins_word(a - 1)) && (b == units.size() || !joins_word(b));
        bool fold = punct_only ? letter_after : (letter_before || letter_after || (standalone && has_symbol));
        if (fold) {
            for (std::size_t k = a; k < b; ++k) {
                char c = table.apply(units[k].text[0]);
                units[k].text[0] = c;
                units[k].kind = classify_ascii(c);
            }
        }
        a = b;
    }

    // 3. collapse runs longer than 3 to 2; the second survivor absorbs the rest.
    // Backticks are exempt: collapsing them could pair up code delimiters.
    std::vector<Unit> collapsed;
    collapsed.reserve(units.size());
    for (std::size_t a = 0; a < units.size();) {
        std::size_t b = a + 1;
        if (units[a].text != "`") {
            while (b < units.size() && units[b].text == units[a].text) ++b;
        }
        if (b - a > 3) {
            collapsed.push_back(units[a]);
            Unit second = units[a + 1];
            second.original.end = units[b - 1].original.end;
            second.code = second.code || units[b - 1].code;
            collapsed.push_back(std::move(second));
        } else {
            for (std::size_t k = a; k < b; ++k) collapsed.push_back(units[k]);
        }
        a = b;
    }

    // 4. folded string and offset map
    out.offsets_.reserve(collapsed.size());
    for (const auto& u : collapsed) {
        out.offsets_.push_back({out.folded_.size(), u.original});
        out.folded_ += u.text;
    }

    // 5. tokens
    for (std::size_t a = 0; a < collapsed.size();) {
        const auto& u = collapsed[a];
        if (u.kind == UnitKind::Space) {
            ++a;
            continue;
        }
        if (is_word_kind(u.kind)) {
            std::size_t b = a + 1;
            while (b < collapsed.size()) {
                if (is_word_kind(collapsed[b].kind)) {
                    ++b;
                } else if (collapsed[b].kind == UnitKind::Apostrophe && b + 1 < collapsed.size() &&
                           is_word_kind(collapsed[b + 1].kind)) {
                    b += 2;
                } else {
                    break;
                }
            }
            Token t;
            t.is_word = true;
            t.start = collapsed[a].original.start;
            t.end = collapsed[b - 1].original.end;
            for (std::size_t k = a; k < b; ++k) {
                t.text += collapsed[k].kind == UnitKind::Apostrophe ? std::string("'") : collapsed[k].text;
            }
            out.tokens_.push_back(std::move(t));
            a = b;
        } else {
            out.tokens_.push_back({u.text, u.original.start, u.original.end, false});
            ++a;
        }
    }
    return out;
}

}  // namespace crs
