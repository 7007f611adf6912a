#pragma once

#include "crs/normalizer.hpp"
#include "crs/types.hpp"

#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace crs {

enum class Severity { Mild, Strong };
enum class AppliesTo { Raw, Folded, Both };

std::string_view to_string(Severity s);
std::string_view to_string(AppliesTo a);

struct RulePattern {
    std::string id;
    std::string pattern;
    ClassSet classes;
    Severity severity = Severity::Mild;
    AppliesTo applies_to = AppliesTo::Both;
    bool word_boundary = true;
};

struct RuleMatch {
    std::string rule_id;
    Span span;            ///< bytes of the original text
    std::string surface;  ///< original.substr(span)
    ClassSet classes;
    Severity severity = Severity::Mild;

    friend bool operator==(const RuleMatch&, const RuleMatch&) = default;
};

/// Checks a pattern against the supported dialect: literals, escapes, classes,
/// '.', alternation, ? * + {m,n}, (?:...) groups and \b. Returns an empty
/// string when valid, otherwise a description of the first violation.
std::string check_pattern_dialect(std::string_view pattern);

class RuleSet {
public:
    RuleSet(std::string version, std::vector<RulePattern> patterns);

    const std::string& version() const noexcept { return version_; }
    const std::vector<RulePattern>& patterns() const noexcept { return patterns_; }
    std::size_t size() const noexcept { return patterns_.size(); }

    /// All hits sorted by (span.start, span.end, rule_id). Raw hits that touch
    /// stripped code are dropped; folded hits are mapped through the offset map.
    std::vector<RuleMatch> scan(const NormalizedText& norm) const;

    /// True when scan() would return at least one match.
    bool matches_any(const NormalizedText& norm) const;

private:
    struct Compiled;
    std::string version_;
    std::vector<RulePattern> patterns_;
    std::shared_ptr<const Compiled> compiled_;
};

/// Parses the JSON ruleset format. Throws ParseError, Error(DuplicateRuleId)
/// or Error(InvalidPattern).
RuleSet load_ruleset(std::istream& in);
RuleSet load_ruleset_file(const std::string& path);

inline std::vector<RuleMatch> scan(const NormalizedText& norm, const RuleSet& rs) { return rs.scan(norm); }

ClassSet classes_of(const std::vector<RuleMatch>& matches);

/// normalize + scan convenience used by validators and paraphrasing.
bool is_rule_clean(std::string_view text, const RuleSet& rs, const NormalizeOptions& opts = {});

}  // namespace crs
