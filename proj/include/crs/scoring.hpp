#pragma once

#include "crs/normalizer.hpp"

#include <chrono>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crs {

enum class ScoreSource { Local, Remote };
enum class Band { Clean, Gray, OffensiveCandidate };

std::string_view to_string(ScoreSource s);
std::string_view to_string(Band b);

struct ToxicityScore {
    double value = 0.0;
    ScoreSource source = ScoreSource::Local;
    /// (term, weight) pairs, heaviest first; only filled by the local scorer.
    std::vector<std::pair<std::string, double>> contributions;
};

struct ScorerConfig {
    double offensive_threshold = 0.7;
    double clean_threshold = 0.05;
    std::optional<std::string> remote_endpoint;  ///< http://host[:port]/path
    std::chrono::milliseconds remote_timeout{2000};
    std::string api_key_header;
    std::string api_key;

    /// Throws Error(InvalidConfig) unless 0 <= clean < offensive <= 1 and the
    /// timeout is positive.
    void validate() const;
};

/// term -> weight in (0, 1]; terms are lowercase single tokens.
class ToxicityLexicon {
public:
    static ToxicityLexicon load(std::istream& in);
    static ToxicityLexicon load_file(const std::string& path);

    /// Throws Error(InvalidConfig) for uppercase terms or weights outside (0, 1].
    void add(std::string term, double weight);

    std::optional<double> weight(std::string_view term) const;
    std::size_t size() const noexcept { return entries_.size(); }
    const std::unordered_map<std::string, double>& entries() const noexcept { return entries_; }

private:
    std::unordered_map<std::string, double> entries_;
};

/// Noisy-or over the distinct lexicon terms found among the word tokens.
/// The product runs in (weight desc, term asc) order, so the value does not
/// depend on token order even at the last bit.
ToxicityScore score_local(const NormalizedText& norm, const ToxicityLexicon& lex);

/// Noisy-or over an explicit weight list; exposed for property tests.
double noisy_or(std::vector<double> weights);

/// POSTs {"text": body} and reads {"score": number}, clamped to [0, 1].
/// Throws Error(RemoteUnavailable) on network failure or timeout and
/// Error(RemoteMalformed) on a non-200 status or an unusable body.
ToxicityScore score_remote(std::string_view body, const ScorerConfig& cfg);

Band band(const ToxicityScore& score, const ScorerConfig& cfg);
Band band(double value, const ScorerConfig& cfg);

struct ScorerStats;

/// Remote-then-local facade. Never throws for scoring; remote failures are
/// counted and the local score is returned instead.
class Scorer {
public:
    Scorer(std::shared_ptr<const ToxicityLexicon> lexicon, ScorerConfig cfg);

    ToxicityScore score(const NormalizedText& norm) const;
    const ScorerConfig& config() const noexcept { return cfg_; }
    const ToxicityLexicon& lexicon() const noexcept { return *lexicon_; }
    std::size_t remote_failures() const noexcept;

private:
    std::shared_ptr<const ToxicityLexicon> lexicon_;
    ScorerConfig cfg_;
    std::shared_ptr<ScorerStats> stats_;
};

}  // namespace crs
