#pragma once

#include "crs/types.hpp"

#include <istream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace crs {

inline constexpr std::size_t kMaxBodyBytes = 65536;

enum class Platform { GitHub, Gitter, Slack, StackOverflow, Other };

std::string_view to_string(Platform p);
std::optional<Platform> parse_platform(std::string_view name);

/// One character of folded text and the original bytes it stands for.
struct OffsetEntry {
    std::size_t folded_begin = 0;  ///< byte offset of this character in `folded`
    Span original;                 ///< bytes of the original it was derived from
};

struct Token {
    std::string text;        ///< folded form
    std::size_t start = 0;   ///< byte offset into the original
    std::size_t end = 0;
    bool is_word = false;

    Span span() const noexcept { return {start, end}; }
};

/// Obfuscation substitution table (single character -> single character).
/// The replacement alphabet may not contain any substituted character, which
/// makes folding idempotent.
class SubstitutionTable {
public:
    SubstitutionTable() = default;

    /// $->s @->a 0->o 1->i 3->e !->i +->t
    static SubstitutionTable defaults();
    /// `from<TAB>to` TSV, '#' comments.
    static SubstitutionTable load(std::istream& in);

    void add(char from, char to);
    bool substitutes(char c) const noexcept { return map_[static_cast<unsigned char>(c)] != 0; }
    char apply(char c) const noexcept { return map_[static_cast<unsigned char>(c)]; }
    /// Characters that map to `target`, used to generate obfuscated variants.
    std::string sources_of(char target) const;
    std::size_t size() const noexcept;

private:
    char map_[256] = {};
};

struct NormalizeOptions {
    bool strip_code = true;
    std::shared_ptr<const SubstitutionTable> substitutions;  ///< null means defaults()
};

class NormalizedText {
public:
    const std::string& original() const noexcept { return original_; }
    const std::string& folded() const noexcept { return folded_; }
    const std::vector<OffsetEntry>& offset_map() const noexcept { return offsets_; }
    const std::vector<Token>& tokens() const noexcept { return tokens_; }
    /// Original byte ranges blanked by code stripping.
    const std::vector<Span>& code_spans() const noexcept { return code_spans_; }

    /// Number of folded characters.
    std::size_t folded_length() const noexcept { return offsets_.size(); }

    /// Maps a byte range of `folded` (aligned to character boundaries) to the
    /// original byte span it covers.
    Span to_original(Span folded_bytes) const;

    bool in_code(Span original_bytes) const noexcept;

    std::string_view original_slice(Span s) const { return std::string_view(original_).substr(s.start, s.length()); }

private:
    friend NormalizedText normalize(std::string_view body, const NormalizeOptions& opts);

    std::string original_;
    std::string folded_;
    std::vector<OffsetEntry> offsets_;
    std::vector<Token> tokens_;
    std::vector<Span> code_spans_;
};

/// Folds `body`: code blanking, ASCII lowercasing, context-sensitive symbol
/// substitution and run collapsing (runs longer than 3 become 2).
/// Throws Error(InputTooLarge) above kMaxBodyBytes, Error(InvalidEncoding)
/// for malformed UTF-8.
NormalizedText normalize(std::string_view body, const NormalizeOptions& opts = {});

/// Byte ranges of paired ``` fences and paired single backticks, delimiters
/// included. Unpaired backticks are not part of any range.
std::vector<Span> find_code_spans(std::string_view body);

/// Replaces each code range by a single space.
std::string strip_code(std::string_view body);

bool is_valid_utf8(std::string_view s);

}  // namespace crs
