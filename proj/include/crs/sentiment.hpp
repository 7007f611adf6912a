#pragma once

#include "crs/normalizer.hpp"

#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace crs {

enum class Polarity { Positive, Negative, Neutral };

std::string_view to_string(Polarity p);

struct SentimentResult {
    double compound = 0.0;  ///< in [-1, 1]
    Polarity label = Polarity::Neutral;
};

inline constexpr double kNegationScalar = -0.74;
inline constexpr double kBoosterIncrement = 0.293;
inline constexpr double kCapsIncrement = 0.733;
inline constexpr double kExclamationIncrement = 0.292;
inline constexpr int kMaxExclamations = 3;
inline constexpr double kNormalizationAlpha = 15.0;
inline constexpr int kNegationWindow = 3;

class ValenceLexicon {
public:
    /// Loads `term<TAB>valence`, `term<TAB>increment` and one-term-per-line files.
    static ValenceLexicon load(std::istream& valences, std::istream& boosters, std::istream& negators);
    /// Loads valence.tsv, boosters.tsv and negators.tsv from a directory.
    static ValenceLexicon load_dir(const std::string& dir);

    void add_valence(std::string term, double valence);
    void add_booster(std::string term, double increment);
    void add_negator(std::string term);

    const double* valence(std::string_view term) const;
    const double* booster(std::string_view term) const;
    bool is_negator(std::string_view term) const;

    const std::unordered_map<std::string, double>& valences() const noexcept { return valences_; }
    const std::unordered_set<std::string>& negators() const noexcept { return negators_; }

private:
    std::unordered_map<std::string, double> valences_;
    std::unordered_map<std::string, double> boosters_;
    std::unordered_set<std::string> negators_;
};

Polarity polarity_of(double compound);

/// Lexicon-and-rules sentiment over the word tokens of `norm`. Negators and
/// boosters carry no valence of their own.
SentimentResult analyze_sentiment(const NormalizedText& norm, const ValenceLexicon& lex);

}  // namespace crs
