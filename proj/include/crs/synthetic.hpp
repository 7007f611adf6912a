#pragma once

#include "crs/corpus.hpp"
#include "crs/ml.hpp"
#include "crs/random.hpp"
#include "crs/rules.hpp"
#include "crs/scoring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace crs::synthetic {

/// Nonsense consonant-vowel words drawn from a fixed consonant set, so pools
/// built from disjoint consonant sets never share a word.
std::vector<std::string> word_pool(std::string_view consonants, std::size_t count, std::uint64_t seed);

/// `per_class` label-1 documents over one pool and `per_class` label-0
/// documents over a disjoint pool, interleaved.
std::vector<LabelledText> separable_dataset(std::size_t per_class, std::uint64_t seed);

/// Offensive records whose class set is random and whose words come from a
/// per-class pool; classes are therefore linearly recoverable.
std::vector<LabelledText> disjoint_multilabel_dataset(std::size_t n, std::uint64_t seed);

/// Lexicon terms of at least `min_weight` that the ruleset flags when the term
/// stands alone, sorted. These make template-offensive text detectable by both
/// the rules and the local scorer.
std::vector<std::string> offensive_terms(const RuleSet& rules, const ToxicityLexicon& lexicon, double min_weight);

/// A developer-chat sentence free of rule matches and lexicon words.
std::string clean_comment(Rng& rng);

/// A clean template with `terms` slotted in, one or two of them.
std::string offensive_comment(Rng& rng, const std::vector<std::string>& terms);

/// `total` records across four platforms, of which exactly `offensive` (at
/// seeded positions) come from offensive_comment and the rest from
/// clean_comment. ids are zero-padded so text order is numeric order.
std::vector<CommentRecord> comment_corpus(std::size_t total, std::size_t offensive, std::uint64_t seed,
                                          const std::vector<std::string>& terms);

}  // namespace crs::synthetic
