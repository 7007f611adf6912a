#include "crs/pipeline.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace crs {

std::string_view to_string(Mode m) { return m == Mode::Strict ? "strict" : "sensitive"; }

Mode parse_mode(std::string_view name) {
    if (name == "strict") return Mode::Strict;
    if (name == "sensitive") return Mode::Sensitive;
    throw Error(ErrorCode::InvalidConfig, "unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) { return v == Verdict::Offensive ? "offensive" : "clean"; }

EnginePaths EnginePaths::defaults(const std::string& data_dir) {
    return {data_dir + "/rules/default_rules.json", data_dir + "/lexicons/toxicity.tsv", data_dir + "/lexicons",
            data_dir + "/models/binary.json",       data_dir + "/models/multilabel.json", data_dir + "/thesaurus/milder.tsv"};
}

namespace {

void check_model_fits(const Vocabulary& vocab, const LinearModel& model, const std::string& what) {
    if (model.weights.size() != vocab.feature_dim()) {
        throw Error(ErrorCode::EngineNotReady, what + " has " + std::to_string(model.weights.size()) +
                                                   " weights for a vocabulary of dimension " +
                                                   std::to_string(vocab.feature_dim()));
    }
}

std::string digest(std::string_view content) { return "fnv1a:" + hex64(fnv1a(content)); }

}  // namespace

EngineContext::EngineContext(Parts parts, EngineOptions options)
    : rules_(std::move(parts.rules)),
      toxicity_(std::make_shared<const ToxicityLexicon>(std::move(parts.toxicity))),
      valence_(std::move(parts.valence)),
      binary_(std::move(parts.binary)),
      multilabel_(std::move(parts.multilabel)),
      thesaurus_(std::move(parts.thesaurus), rules_, toxicity_.get()),
      options_(std::move(options)),
      scorer_(toxicity_, options_.scorer),
      versions_(std::move(parts.versions)) {
    options_.scorer.validate();
    check_model_fits(binary_.vocab, binary_.model, "binary model");
    for (std::size_t c = 0; c < multilabel_.model.per_class.size(); ++c) {
        check_model_fits(multilabel_.vocab, multilabel_.model.per_class[c],
                         "multilabel model (" + std::string(to_string(kAllClasses[c])) + ")");
    }
    if (options_.rewriter_url) rewriter_.emplace(*options_.rewriter_url, options_.rewriter_timeout);
    versions_.emplace("ruleset", rules_.version());
}

std::shared_ptr<const EngineContext> EngineContext::load(const EnginePaths& paths, EngineOptions options) {
    auto parse_from = [](const std::string& content) { return std::istringstream(content); };

    std::map<std::string, std::string> versions;

    auto rules_text = read_file(paths.ruleset);
    auto in = parse_from(rules_text);
    auto rules = load_ruleset(in);

    auto tox_text = read_file(paths.toxicity_lexicon);
    in = parse_from(tox_text);
    auto toxicity = ToxicityLexicon::load(in);
    versions["toxicity_lexicon"] = digest(tox_text);

    auto val_text = read_file(paths.valence_dir + "/valence.tsv");
    auto boost_text = read_file(paths.valence_dir + "/boosters.tsv");
    auto neg_text = read_file(paths.valence_dir + "/negators.tsv");
    auto vin = parse_from(val_text), bin = parse_from(boost_text), nin = parse_from(neg_text);
    auto valence = ValenceLexicon::load(vin, bin, nin);
    versions["valence_lexicon"] = digest(val_text + '\0' + boost_text + '\0' + neg_text);

    auto binary_text = read_file(paths.binary_model);
    in = parse_from(binary_text);
    auto binary = load_binary_model(in);
    versions["binary_model"] = binary.model.trained_on;

    auto ml_text = read_file(paths.multilabel_model);
    in = parse_from(ml_text);
    auto multilabel = load_multilabel_model(in);
    versions["multilabel_model"] = multilabel.model.per_class[0].trained_on;

    auto th_text = read_file(paths.thesaurus);
    in = parse_from(th_text);
    auto thesaurus = Thesaurus::load(in);
    versions["thesaurus"] = digest(th_text);

    Parts parts{std::move(rules),      std::move(toxicity),  std::move(valence), std::move(binary),
                std::move(multilabel), std::move(thesaurus), std::move(versions)};
    return std::make_shared<const EngineContext>(std::move(parts), std::move(options));
}

ParaphraseContext EngineContext::paraphrase_context() const {
    return {&rules_, &thesaurus_, toxicity_.get(), rewriter_ ? &*rewriter_ : nullptr, options_.normalize_options};
}

// ---------------------------------------------------------------- analyze

std::vector<Span> spanless_targets(const NormalizedText& norm, const ToxicityScore& local_score) {
    std::set<std::string_view> terms;
    for (const auto& [term, w] : local_score.contributions) terms.insert(term);
    std::vector<Span> out;
    for (const auto& tok : norm.tokens()) {
        if (tok.is_word && terms.count(tok.text)) out.push_back(tok.span());
    }
    if (!out.empty()) return out;

    const auto& text = norm.original();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    auto last = text.find_last_not_of(" \t\r\n");
    return {{first, last + 1}};
}

AnalysisReport analyze(std::string_view body, const EngineContext& ctx, const AnalyzeOptions& opts) {
    using Clock = std::chrono::steady_clock;
    auto ms_since = [](Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    AnalysisReport r;
    r.mode = opts.mode.value_or(ctx.options().mode);
    r.versions = ctx.versions();

    auto t0 = Clock::now();
    auto norm = normalize(body, ctx.options().normalize_options);
    r.matches = ctx.rules().scan(norm);
    r.score = ctx.scorer().score(norm);
    r.band = band(r.score, ctx.scorer().config());
    r.sentiment = analyze_sentiment(norm, ctx.valence());
    const int regex_flag = r.matches.empty() ? 0 : 1;
    const auto& bin = ctx.binary();
    r.classifier = predict(bin.model, vectorize(bin.vocab, norm, regex_flag, r.sentiment));

    const bool rule_hit = !r.matches.empty();
    const bool score_hit = r.band == Band::OffensiveCandidate;
    bool offensive = r.mode == Mode::Strict ? (rule_hit && score_hit)
                                            : (rule_hit || score_hit || r.classifier.label == 1);
    r.verdict = offensive ? Verdict::Offensive : Verdict::Clean;
    r.timing_ms.detect = ms_since(t0);

    t0 = Clock::now();
    if (offensive) {
        r.classes = classes_of(r.matches);
        if (r.classes.empty()) {
            const auto& ml = ctx.multilabel();
            r.classes = predict_classes(ml.model, vectorize(ml.vocab, norm, regex_flag, r.sentiment));
        }
    }
    r.timing_ms.classify = ms_since(t0);

    // Highlight spans are the rule matches themselves; nothing to compute.
    r.timing_ms.highlight = 0.0;

    t0 = Clock::now();
    if (offensive && opts.suggestions) {
        auto pctx = ctx.paraphrase_context();
        std::array<ParaphraseSuggestion, 3> out;
        if (rule_hit) {
            out = suggest(norm, spans_of(r.matches), pctx);
        } else {
            auto local = r.score.source == ScoreSource::Local ? r.score : score_local(norm, ctx.toxicity());
            auto targets = spanless_targets(norm, local);
            if (targets.empty()) targets.push_back({0, body.size()});
            out = suggest(norm, targets, pctx, false);
        }
        r.suggestions.assign(out.begin(), out.end());
    }
    r.timing_ms.paraphrase = ms_since(t0);
    return r;
}

// ---------------------------------------------------------------- serialization

namespace {

nlohmann::ordered_json class_names(const ClassSet& classes) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& n : classes.names()) arr.push_back(n);
    return arr;
}

}  // namespace

nlohmann::ordered_json to_json(const RuleMatch& m) {
    return {{"rule_id", m.rule_id},       {"start", m.span.start},
            {"end", m.span.end},          {"surface", m.surface},
            {"classes", class_names(m.classes)}, {"severity", to_string(m.severity)}};
}

nlohmann::ordered_json to_json(const ParaphraseSuggestion& s) {
    auto spans = nlohmann::ordered_json::array();
    for (const auto& e : s.changed_spans) {
        spans.push_back({{"start", e.original.start}, {"end", e.original.end}, {"replacement", e.replacement}});
    }
    return {{"strategy", to_string(s.strategy)},
            {"text", s.text},
            {"changed_spans", std::move(spans)},
            {"fallback", s.fallback},
            {"duplicate", s.duplicate}};
}

nlohmann::ordered_json to_json(const AnalysisReport& r, bool include_timing) {
    auto contributions = nlohmann::ordered_json::array();
    for (const auto& [term, w] : r.score.contributions) contributions.push_back({{"term", term}, {"weight", w}});
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : r.matches) matches.push_back(to_json(m));
    auto suggestions = nlohmann::ordered_json::array();
    for (const auto& s : r.suggestions) suggestions.push_back(to_json(s));
    nlohmann::ordered_json versions = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.versions) versions[k] = v;

    nlohmann::ordered_json j = {
        {"verdict", to_string(r.verdict)},
        {"mode", to_string(r.mode)},
        {"classes", class_names(r.classes)},
        {"score",
         {{"value", r.score.value}, {"source", to_string(r.score.source)}, {"contributions", std::move(contributions)}}},
        {"band", to_string(r.band)},
        {"matches", std::move(matches)},
        {"sentiment", {{"compound", r.sentiment.compound}, {"label", to_string(r.sentiment.label)}}},
        {"classifier", {{"label", r.classifier.label}, {"margin", r.classifier.margin}}},
        {"suggestions", std::move(suggestions)},
        {"versions", std::move(versions)},
    };
    if (include_timing) {
        j["timing_ms"] = {{"detect", r.timing_ms.detect},
                          {"classify", r.timing_ms.classify},
                          {"highlight", r.timing_ms.highlight},
                          {"paraphrase", r.timing_ms.paraphrase}};
    }
    return j;
}

// ---------------------------------------------------------------- highlights

std::string render_highlights(std::string_view body, const std::vector<RuleMatch>& matches, Marker marker) {
    std::vector<std::pair<Span, ClassSet>> merged;
    std::vector<std::pair<Span, ClassSet>> sorted;
    for (const auto& m : matches) {
        if (m.span.end > body.size() || m.span.start > m.span.end) {
            throw Error(ErrorCode::InvalidConfig, "highlight span outside the text");
        }
        sorted.emplace_back(m.span, m.classes);
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [span, classes] : sorted) {
        if (!merged.empty() && span.start < merged.back().first.end) {
            merged.back().first.end = std::max(merged.back().first.end, span.end);
            merged.back().second |= classes;
        } else {
            merged.emplace_back(span, classes);
        }
    }

    std::string out;
    std::size_t pos = 0;
    for (const auto& [span, classes] : merged) {
        out.append(body.substr(pos, span.start - pos));
        auto surface = body.substr(span.start, span.length());
        if (marker == Marker::Brackets) {
            out += "⟦";
            out += surface;
            out += '|';
            out += classes.join(",");
            out += "⟧";
        } else {
            out += "\x1b[4m";
            out += surface;
            out += "\x1b[24m";
        }
        pos = span.end;
    }
    out.append(body.substr(pos));
    return out;
}

}  // namespace crs
