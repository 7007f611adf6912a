#include "crs/scoring.hpp"

#include "crs/error.hpp"
#include "crs/http.hpp"
#include "crs/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

namespace crs {

std::string_view to_string(ScoreSource s) { return s == ScoreSource::Local ? "local" : "remote"; }

std::string_view to_string(Band b) {
    switch (b) {
        case Band::Clean: return "clean";
        case Band::Gray: return "gray";
        case Band::OffensiveCandidate: return "offensive_candidate";
    }
    return "gray";
}

void ScorerConfig::validate() const {
    if (!(clean_threshold >= 0.0 && clean_threshold < offensive_threshold && offensive_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "thresholds must satisfy 0 <= clean < offensive <= 1");
    }
    if (remote_timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "remote timeout must be positive");
    if (remote_endpoint) parse_http_url(*remote_endpoint);
}

void ToxicityLexicon::add(std::string term, double weight) {
    if (term.empty()) throw Error(ErrorCode::InvalidConfig, "empty lexicon term");
    if (std::any_of(term.begin(), term.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
        throw Error(ErrorCode::InvalidConfig, "lexicon term must be lowercase: " + term);
    }
    if (!(weight > 0.0 && weight <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "lexicon weight outside (0,1] for " + term);
    }
    entries_[std::move(term)] = weight;
}

ToxicityLexicon ToxicityLexicon::load(std::istream& in) {
    ToxicityLexicon lex;
    for (auto& row : read_tsv(in, 2, 2)) {
        double w = 0.0;
        try {
            std::size_t used = 0;
            w = std::stod(row.fields[1], &used);
            if (used != row.fields[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(row.line, "bad weight '" + row.fields[1] + "'");
        }
        try {
            lex.add(std::move(row.fields[0]), w);
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    }
    return lex;
}

ToxicityLexicon ToxicityLexicon::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

std::optional<double> ToxicityLexicon::weight(std::string_view term) const {
    auto it = entries_.find(std::string(term));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

double noisy_or(std::vector<double> weights) {
    std::sort(weights.begin(), weights.end(), std::greater<>());
    double keep = 1.0;
    for (double w : weights) keep *= 1.0 - std::clamp(w, 0.0, 1.0);
    return std::clamp(1.0 - keep, 0.0, 1.0);
}

ToxicityScore score_local(const NormalizedText& norm, const ToxicityLexicon& lex) {
    std::set<std::string> seen;
    ToxicityScore out;
    for (const auto& tok : norm.tokens()) {
        if (!tok.is_word || seen.count(tok.text)) continue;
        if (auto w = lex.weight(tok.text)) {
            seen.insert(tok.text);
            out.contributions.emplace_back(tok.text, *w);
        }
    }
    std::sort(out.contributions.begin(), out.contributions.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    double keep = 1.0;
    for (const auto& c : out.contributions) keep *= 1.0 - c.second;
    out.value = std::clamp(1.0 - keep, 0.0, 1.0);
    return out;
}

ToxicityScore score_remote(std::string_view body, const ScorerConfig& cfg) {
    if (!cfg.remote_endpoint) throw Error(ErrorCode::RemoteUnavailable, "no remote endpoint configured");
    auto endpoint = parse_http_url(*cfg.remote_endpoint);
    std::vector<std::pair<std::string, std::string>> headers;
    if (!cfg.api_key_header.empty()) headers.emplace_back(cfg.api_key_header, cfg.api_key);

    nlohmann::json req = {{"text", std::string(body)}};
    auto res = post_json(endpoint, req.dump(), cfg.remote_timeout, headers);
    if (!res.delivered) throw Error(ErrorCode::RemoteUnavailable, res.error);
    if (res.status != 200) throw Error(ErrorCode::RemoteMalformed, "status " + std::to_string(res.status));

    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("score") || !doc["score"].is_number()) {
        throw Error(ErrorCode::RemoteMalformed, "response lacks a numeric score");
    }
    double v = doc["score"].get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::RemoteMalformed, "score is not finite");
    ToxicityScore out;
    out.value = std::clamp(v, 0.0, 1.0);
    out.source = ScoreSource::Remote;
    return out;
}

Band band(double value, const ScorerConfig& cfg) {
    if (value <= cfg.clean_threshold) return Band::Clean;
    if (value >= cfg.offensive_threshold) return Band::OffensiveCandidate;
    return Band::Gray;
}

Band band(const ToxicityScore& score, const ScorerConfig& cfg) { return band(score.value, cfg); }

struct ScorerStats {
    std::atomic<std::size_t> remote_failures{0};
};

Scorer::Scorer(std::shared_ptr<const ToxicityLexicon> lexicon, ScorerConfig cfg)
    : lexicon_(std::move(lexicon)), cfg_(std::move(cfg)), stats_(std::make_shared<ScorerStats>()) {
    if (!lexicon_) throw Error(ErrorCode::InvalidConfig, "scorer needs a lexicon");
    cfg_.validate();
}

ToxicityScore Scorer::score(const NormalizedText& norm) const {
    if (cfg_.remote_endpoint) {
        try {
            return score_remote(norm.original(), cfg_);
        } catch (const Error&) {
            ++stats_->remote_failures;
        }
    }
    return score_local(norm, *lexicon_);
}

std::size_t Scorer::remote_failures() const noexcept { return stats_->remote_failures.load(); }

}  // namespace crs
