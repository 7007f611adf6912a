#pragma once

#include "crs/http.hpp"
#include "crs/normalizer.hpp"
#include "crs/rules.hpp"
#include "crs/scoring.hpp"
#include "crs/thesaurus.hpp"

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crs {

enum class Strategy { Synonym, Mask, Rewrite };
std::string_view to_string(Strategy s);

inline constexpr std::string_view kMaskToken = "[MASK]";

struct SpanEdit {
    Span original;
    std::string replacement;

    friend bool operator==(const SpanEdit&, const SpanEdit&) = default;
};

struct ParaphraseSuggestion {
    Strategy strategy = Strategy::Synonym;
    std::string text;
    std::vector<SpanEdit> changed_spans;  ///< sorted, disjoint, in original bytes
    bool fallback = false;                ///< rewrite slot filled by the deletion variant
    bool duplicate = false;               ///< same text as an earlier suggestion
};

/// Applies sorted, disjoint edits to `original`.
std::string apply_edits(std::string_view original, const std::vector<SpanEdit>& edits);

/// Unions overlapping or touching spans.
std::vector<Span> merge_spans(std::vector<Span> spans);

/// Offensive term -> milder alternatives, each checked at construction to be
/// rule-clean and free of toxicity-lexicon words.
class MilderThesaurus {
public:
    MilderThesaurus() = default;
    /// Throws Error(UnsafeThesaurus) naming the first unsafe alternative.
    MilderThesaurus(Thesaurus entries, const RuleSet& rules, const ToxicityLexicon* lexicon = nullptr);

    static MilderThesaurus load_file(const std::string& path, const RuleSet& rules,
                                     const ToxicityLexicon* lexicon = nullptr);

    /// Alternatives for a surface form: folded text first, then without a
    /// trailing plural 's'.
    const std::vector<std::string>* lookup(std::string_view surface) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    Thesaurus entries_;
};

class RewriterClient {
public:
    RewriterClient(std::string endpoint, std::chrono::milliseconds timeout);

    /// POSTs {"text"} and returns the "rewrite" field. Throws
    /// Error(RewriterUnavailable) on transport failure or an unusable reply.
    std::string rewrite(std::string_view body) const;

private:
    HttpEndpoint endpoint_;
    std::chrono::milliseconds timeout_;
};

struct ParaphraseContext {
    const RuleSet* rules = nullptr;
    const MilderThesaurus* thesaurus = nullptr;
    const ToxicityLexicon* lexicon = nullptr;       ///< enables the score check on rewrites
    const RewriterClient* rewriter = nullptr;       ///< null means offline
    NormalizeOptions normalize_options;
};

/// Replaces each target span by its first viable milder alternative, or
/// deletes it together with one adjacent blank. Always rule-clean.
ParaphraseSuggestion paraphrase_synonym(const NormalizedText& norm, const std::vector<Span>& targets,
                                        const ParaphraseContext& ctx);

/// Replaces each target span by [MASK]. Always rule-clean.
ParaphraseSuggestion paraphrase_mask(const NormalizedText& norm, const std::vector<Span>& targets,
                                     const ParaphraseContext& ctx);

/// Deletes every target span with whitespace collapse.
ParaphraseSuggestion paraphrase_delete(const NormalizedText& norm, const std::vector<Span>& targets,
                                       const ParaphraseContext& ctx);

/// External rewrite, accepted only when rule-clean and, with a lexicon, scored
/// strictly lower than the input. Throws Error(RewriterUnavailable) or
/// Error(RewriterUnsafe).
ParaphraseSuggestion paraphrase_rewrite(std::string_view body, const ParaphraseContext& ctx);

/// Exactly three suggestions: synonym, mask, then rewrite or its deletion
/// fallback. With `use_thesaurus` false the synonym slot deletes instead.
/// Throws Error(NoOffenceFound) for an empty target list.
std::array<ParaphraseSuggestion, 3> suggest(const NormalizedText& norm, const std::vector<Span>& targets,
                                            const ParaphraseContext& ctx, bool use_thesaurus = true);

std::vector<Span> spans_of(const std::vector<RuleMatch>& matches);

}  // namespace crs
