#include "crs/paraphrase.hpp"

#include "crs/error.hpp"

#include "json.hpp"

#include <algorithm>

namespace crs {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Synonym: return "synonym";
        case Strategy::Mask: return "mask";
        case Strategy::Rewrite: return "rewrite";
    }
    return "synonym";
}

std::string apply_edits(std::string_view original, const std::vector<SpanEdit>& edits) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& e : edits) {
        out.append(original.substr(pos, e.original.start - pos));
        out += e.replacement;
        pos = e.original.end;
    }
    out.append(original.substr(pos));
    return out;
}

std::vector<Span> merge_spans(std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end());
    std::vector<Span> out;
    for (const auto& s : spans) {
        if (!out.empty() && s.start <= out.back().end) {
            out.back().end = std::max(out.back().end, s.end);
        } else {
            out.push_back(s);
        }
    }
    return out;
}

std::vector<Span> spans_of(const std::vector<RuleMatch>& matches) {
    std::vector<Span> out;
    for (const auto& m : matches) out.push_back(m.span);
    return out;
}

// ---------------------------------------------------------------- thesaurus

namespace {

std::string lookup_key(std::string_view surface) {
    auto folded = normalize(surface).folded();
    std::string key;
    for (char c : folded) {
        bool blank = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (blank) {
            if (!key.empty() && key.back() != ' ') key += ' ';
        } else {
            key += c;
        }
    }
    while (!key.empty() && key.back() == ' ') key.pop_back();
    return key;
}

}  // namespace

MilderThesaurus::MilderThesaurus(Thesaurus entries, const RuleSet& rules, const ToxicityLexicon* lexicon)
    : entries_(std::move(entries)) {
    for (const auto& [term, alts] : entries_.entries()) {
        for (const auto& alt : alts) {
            auto norm = normalize(alt);
            if (rules.matches_any(norm)) {
                throw Error(ErrorCode::UnsafeThesaurus, "alternative '" + alt + "' for '" + term + "' matches a rule");
            }
            if (lexicon) {
                for (const auto& tok : norm.tokens()) {
                    if (tok.is_word && lexicon->weight(tok.text)) {
                        throw Error(ErrorCode::UnsafeThesaurus,
                                    "alternative '" + alt + "' for '" + term + "' contains lexicon term '" + tok.text + "'");
                    }
                }
            }
        }
    }
}

MilderThesaurus MilderThesaurus::load_file(const std::string& path, const RuleSet& rules,
                                           const ToxicityLexicon* lexicon) {
    return MilderThesaurus(Thesaurus::load_file(path), rules, lexicon);
}

const std::vector<std::string>* MilderThesaurus::lookup(std::string_view surface) const {
    auto key = lookup_key(surface);
    if (auto* alts = entries_.lookup(key)) return alts;
    std::string joined;
    for (char c : key) {
        if (c != ' ') joined += c;
    }
    if (auto* alts = entries_.lookup(joined)) return alts;
    if (key.size() > 3 && key.back() == 's') return entries_.lookup(key.substr(0, key.size() - 1));
    return nullptr;
}

// ---------------------------------------------------------------- editing engine

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }

struct Slot {
    Span span;
    std::vector<std::string> options;  ///< tried in order; past the end means delete
    std::size_t choice = 0;

    bool deleting() const { return choice >= options.size(); }
};

std::vector<SpanEdit> build_edits(const std::string& original, const std::vector<Slot>& slots) {
    std::vector<SpanEdit> edits;
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        SpanEdit e{s.span, {}};
        if (!s.deleting()) {
            e.replacement = s.options[s.choice];
        } else if (e.original.start > prev_end && is_blank(original[e.original.start - 1])) {
            --e.original.start;
        } else if (e.original.end < original.size() && is_blank(original[e.original.end]) &&
                   (i + 1 == slots.size() || slots[i + 1].span.start > e.original.end)) {
            ++e.original.end;
        }
        prev_end = e.original.end;
        edits.push_back(std::move(e));
    }
    return edits;
}

/// Where an edited-text position falls in the original. Positions inside a
/// replacement map to the edit's start (for starts) or end (for ends).
std::size_t to_original_pos(const std::vector<SpanEdit>& edits, std::size_t pos, bool is_end) {
    std::ptrdiff_t shift = 0;
    for (const auto& e : edits) {
        const auto new_start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(e.original.start) + shift);
        const auto new_end = new_start + e.replacement.size();
        if (pos < new_start || (pos == new_start && !is_end)) break;
        if (pos < new_end || (pos == new_end && is_end)) return is_end ? e.original.end : e.original.start;
        shift += static_cast<std::ptrdiff_t>(e.replacement.size()) - static_cast<std::ptrdiff_t>(e.original.length());
    }
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) - shift);
}

ParaphraseSuggestion edit_until_clean(const NormalizedText& norm, std::vector<Slot> slots, Strategy strategy,
                                      const ParaphraseContext& ctx) {
    if (!ctx.rules) throw Error(ErrorCode::EngineNotReady, "paraphrasing needs a ruleset");
    const std::string& original = norm.original();
    for (int round = 0;; ++round) {
        auto edits = build_edits(original, slots);
        auto text = apply_edits(original, edits);
        auto hits = ctx.rules->scan(normalize(text, ctx.normalize_options));
        if (hits.empty()) return {strategy, std::move(text), std::move(edits), false, false};

        if (round > 256) {
            // Pathological interaction; drop the whole text rather than loop.
            return {strategy, "", {SpanEdit{{0, original.size()}, ""}}, false, false};
        }

        bool advanced = false;
        std::vector<bool> bumped(slots.size(), false);
        std::vector<Span> escalate;
        for (const auto& h : hits) {
            bool touched = false;
            bool moved = false;
            std::ptrdiff_t shift = 0;
            for (std::size_t i = 0; i < slots.size(); ++i) {
                const auto& e = edits[i];
                const auto ns = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(e.original.start) + shift);
                const auto ne = ns + e.replacement.size();
                shift += static_cast<std::ptrdiff_t>(e.replacement.size()) - static_cast<std::ptrdiff_t>(e.original.length());
                if (ns <= h.span.end && h.span.start <= ne) {
                    touched = true;
                    if (bumped[i]) {
                        moved = true;
                    } else if (!slots[i].deleting()) {
                        ++slots[i].choice;
                        bumped[i] = true;
                        moved = true;
                    }
                }
            }
            advanced = advanced || moved;
            if (!touched || !moved) {
                escalate.push_back({to_original_pos(edits, h.span.start, false), to_original_pos(edits, h.span.end, true)});
            }
        }
        if (advanced) continue;

        // The remaining hits involve only deletions or untouched text: widen
        // the deleted region to cover them.
        std::vector<Span> spans;
        for (const auto& s : slots) spans.push_back(s.span);
        spans.insert(spans.end(), escalate.begin(), escalate.end());
        auto merged = merge_spans(spans);
        std::vector<Slot> next;
        for (const auto& m : merged) {
            Slot fresh{m, {}, 0};
            for (const auto& s : slots) {
                if (s.span == m) fresh = s;
            }
            next.push_back(std::move(fresh));
        }
        slots = std::move(next);
    }
}

std::string match_case(std::string alt, std::string_view surface) {
    if (!surface.empty() && surface[0] >= 'A' && surface[0] <= 'Z' && !alt.empty() && alt[0] >= 'a' && alt[0] <= 'z') {
        alt[0] = static_cast<char>(alt[0] - 'a' + 'A');
    }
    return alt;
}

}  // namespace

ParaphraseSuggestion paraphrase_synonym(const NormalizedText& norm, const std::vector<Span>& targets,
                                        const ParaphraseContext& ctx) {
    std::vector<Slot> slots;
    for (const auto& span : merge_spans(targets)) {
        Slot s{span, {}, 0};
        auto surface = norm.original_slice(span);
        if (ctx.thesaurus) {
            if (const auto* alts = ctx.thesaurus->lookup(surface)) {
                for (const auto& a : *alts) s.options.push_back(match_case(a, surface));
            }
        }
        slots.push_back(std::move(s));
    }
    return edit_until_clean(norm, std::move(slots), Strategy::Synonym, ctx);
}

ParaphraseSuggestion paraphrase_mask(const NormalizedText& norm, const std::vector<Span>& targets,
                                     const ParaphraseContext& ctx) {
    std::vector<Slot> slots;
    for (const auto& span : merge_spans(targets)) slots.push_back({span, {std::string(kMaskToken)}, 0});
    return edit_until_clean(norm, std::move(slots), Strategy::Mask, ctx);
}

ParaphraseSuggestion paraphrase_delete(const NormalizedText& norm, const std::vector<Span>& targets,
                                       const ParaphraseContext& ctx) {
    std::vector<Slot> slots;
    for (const auto& span : merge_spans(targets)) slots.push_back({span, {}, 0});
    return edit_until_clean(norm, std::move(slots), Strategy::Synonym, ctx);
}

// ---------------------------------------------------------------- rewriter

RewriterClient::RewriterClient(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(parse_http_url(endpoint)), timeout_(timeout) {}

std::string RewriterClient::rewrite(std::string_view body) const {
    nlohmann::json req = {{"text", std::string(body)}};
    auto res = post_json(endpoint_, req.dump(), timeout_);
    if (!res.delivered) throw Error(ErrorCode::RewriterUnavailable, res.error);
    if (res.status != 200) throw Error(ErrorCode::RewriterUnavailable, "status " + std::to_string(res.status));
    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("rewrite") || !doc["rewrite"].is_string()) {
        throw Error(ErrorCode::RewriterUnavailable, "reply lacks a rewrite string");
    }
    return doc["rewrite"].get<std::string>();
}

ParaphraseSuggestion paraphrase_rewrite(std::string_view body, const ParaphraseContext& ctx) {
    if (!ctx.rewriter) throw Error(ErrorCode::RewriterUnavailable, "no rewriter configured");
    if (!ctx.rules) throw Error(ErrorCode::EngineNotReady, "paraphrasing needs a ruleset");
    auto text = ctx.rewriter->rewrite(body);
    NormalizedText norm;
    try {
        norm = normalize(text, ctx.normalize_options);
    } catch (const Error& e) {
        throw Error(ErrorCode::RewriterUnavailable, std::string("unusable rewrite: ") + e.what());
    }
    if (ctx.rules->matches_any(norm)) throw Error(ErrorCode::RewriterUnsafe, "rewrite still matches a rule");
    if (ctx.lexicon) {
        double before = score_local(normalize(body, ctx.normalize_options), *ctx.lexicon).value;
        double after = score_local(norm, *ctx.lexicon).value;
        if (before > 0.0 && !(after < before)) {
            throw Error(ErrorCode::RewriterUnsafe, "rewrite does not lower the toxicity score");
        }
    }
    ParaphraseSuggestion s;
    s.strategy = Strategy::Rewrite;
    s.changed_spans = {SpanEdit{{0, body.size()}, text}};
    s.text = std::move(text);
    return s;
}

std::array<ParaphraseSuggestion, 3> suggest(const NormalizedText& norm, const std::vector<Span>& targets,
                                            const ParaphraseContext& ctx, bool use_thesaurus) {
    if (targets.empty()) throw Error(ErrorCode::NoOffenceFound, "nothing to paraphrase");
    std::array<ParaphraseSuggestion, 3> out;
    out[0] = use_thesaurus ? paraphrase_synonym(norm, targets, ctx) : paraphrase_delete(norm, targets, ctx);
    out[1] = paraphrase_mask(norm, targets, ctx);
    try {
        out[2] = paraphrase_rewrite(norm.original(), ctx);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RewriterUnavailable && e.code() != ErrorCode::RewriterUnsafe) throw;
        out[2] = paraphrase_delete(norm, targets, ctx);
        out[2].strategy = Strategy::Rewrite;
        out[2].fallback = true;
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (out[i].text == out[j].text) out[i].duplicate = true;
        }
    }
    return out;
}

}  // namespace crs
