#include "crs/sentiment.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace crs {

namespace {

double parse_number(const TsvRow& row) {
    try {
        std::size_t used = 0;
        double v = std::stod(row.fields[1], &used);
        if (used == row.fields[1].size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(row.line, "bad number '" + row.fields[1] + "'");
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

bool has_lower(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}
bool has_upper(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

}  // namespace

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::Positive: return "positive";
        case Polarity::Negative: return "negative";
        case Polarity::Neutral: return "neutral";
    }
    return "neutral";
}

void ValenceLexicon::add_valence(std::string term, double valence) {
    if (term.empty() || has_upper(term)) throw Error(ErrorCode::InvalidConfig, "valence term must be lowercase");
    if (!(valence >= -4.0 && valence <= 4.0)) throw Error(ErrorCode::InvalidConfig, "valence outside [-4,4]: " + term);
    valences_[std::move(term)] = valence;
}

void ValenceLexicon::add_booster(std::string term, double increment) {
    if (term.empty() || has_upper(term)) throw Error(ErrorCode::InvalidConfig, "booster term must be lowercase");
    boosters_[std::move(term)] = increment;
}

void ValenceLexicon::add_negator(std::string term) {
    if (term.empty() || has_upper(term)) throw Error(ErrorCode::InvalidConfig, "negator must be lowercase");
    negators_.insert(std::move(term));
}

ValenceLexicon ValenceLexicon::load(std::istream& valences, std::istream& boosters, std::istream& negators) {
    ValenceLexicon lex;
    auto guarded = [](const TsvRow& row, auto&& f) {
        try {
            f();
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    };
    for (auto& row : read_tsv(valences, 2, 2)) {
        guarded(row, [&] { lex.add_valence(row.fields[0], parse_number(row)); });
    }
    for (auto& row : read_tsv(boosters, 2, 2)) {
        guarded(row, [&] { lex.add_booster(row.fields[0], parse_number(row)); });
    }
    for (auto& row : read_tsv(negators, 1, 1)) {
        guarded(row, [&] { lex.add_negator(row.fields[0]); });
    }
    return lex;
}

ValenceLexicon ValenceLexicon::load_dir(const std::string& dir) {
    auto v = open_input(dir + "/valence.tsv");
    auto b = open_input(dir + "/boosters.tsv");
    auto n = open_input(dir + "/negators.tsv");
    return load(v, b, n);
}

const double* ValenceLexicon::valence(std::string_view term) const {
    auto it = valences_.find(std::string(term));
    return it == valences_.end() ? nullptr : &it->second;
}

const double* ValenceLexicon::booster(std::string_view term) const {
    auto it = boosters_.find(std::string(term));
    return it == boosters_.end() ? nullptr : &it->second;
}

bool ValenceLexicon::is_negator(std::string_view term) const { return negators_.count(std::string(term)) > 0; }

Polarity polarity_of(double compound) {
    if (compound >= 0.05) return Polarity::Positive;
    if (compound <= -0.05) return Polarity::Negative;
    return Polarity::Neutral;
}

SentimentResult analyze_sentiment(const NormalizedText& norm, const ValenceLexicon& lex) {
    std::vector<const Token*> words;
    for (const auto& t : norm.tokens()) {
        if (t.is_word) words.push_back(&t);
    }

    // Capital emphasis only counts when the text mixes shouted and plain words.
    std::vector<bool> shouted(words.size());
    bool any_shouted = false;
    bool any_plain = false;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto surface = norm.original_slice(words[i]->span());
        shouted[i] = has_upper(surface) && !has_lower(surface);
        (shouted[i] ? any_shouted : any_plain) = true;
    }
    const bool caps_differential = any_shouted && any_plain;

    double x = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& term = words[i]->text;
        if (lex.is_negator(term) || lex.booster(term)) continue;
        const double* base = lex.valence(term);
        if (!base) continue;
        double v = *base;

        for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
            if (lex.is_negator(words[i - back]->text)) {
                v *= kNegationScalar;
                break;
            }
        }
        if (i > 0) {
            if (const double* inc = lex.booster(words[i - 1]->text)) v += sign(v) * *inc;
        }
        if (caps_differential && shouted[i]) v += sign(v) * kCapsIncrement;
        x += v;
    }

    // Count trailing '!' in the original: run collapsing may have shortened them.
    const auto& folded = norm.folded();
    const auto& offsets = norm.offset_map();
    std::size_t bangs = 0;
    std::size_t k = offsets.size();
    while (k > 0 && std::string_view(" \t\r\n").find(folded[offsets[k - 1].folded_begin]) != std::string_view::npos) --k;
    while (k > 0 && folded[offsets[k - 1].folded_begin] == '!') {
        bangs += offsets[k - 1].original.length();
        --k;
    }
    bangs = std::min<std::size_t>(bangs, kMaxExclamations);
    x += sign(x) * kExclamationIncrement * static_cast<double>(bangs);

    SentimentResult out;
    out.compound = std::clamp(x / std::sqrt(x * x + kNormalizationAlpha), -1.0, 1.0);
    out.label = polarity_of(out.compound);
    return out;
}

}  // namespace crs
