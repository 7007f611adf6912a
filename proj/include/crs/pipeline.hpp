#pragma once

#include "crs/ml.hpp"
#include "crs/normalizer.hpp"
#include "crs/paraphrase.hpp"
#include "crs/rules.hpp"
#include "crs/scoring.hpp"
#include "crs/sentiment.hpp"

#include "json.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace crs {

enum class Mode { Strict, Sensitive };
std::string_view to_string(Mode m);
/// Throws Error(InvalidConfig) for anything but "strict" or "sensitive".
Mode parse_mode(std::string_view name);

enum class Verdict { Clean, Offensive };
std::string_view to_string(Verdict v);

struct EnginePaths {
    std::string ruleset;
    std::string toxicity_lexicon;
    std::string valence_dir;  ///< valence.tsv, boosters.tsv, negators.tsv
    std::string binary_model;
    std::string multilabel_model;
    std::string thesaurus;

    /// The artifacts shipped under `data_dir`.
    static EnginePaths defaults(const std::string& data_dir = CRS_DEFAULT_DATA_DIR);
};

struct EngineOptions {
    Mode mode = Mode::Sensitive;
    ScorerConfig scorer;
    std::optional<std::string> rewriter_url;
    std::chrono::milliseconds rewriter_timeout{2000};
    NormalizeOptions normalize_options;
};

/// Everything analyze() reads. Immutable once built; share it through
/// EngineHandle to swap it atomically.
class EngineContext {
public:
    struct Parts {
        RuleSet rules;
        ToxicityLexicon toxicity;
        ValenceLexicon valence;
        BinaryArtifact binary;
        MultiLabelArtifact multilabel;
        Thesaurus thesaurus;
        std::map<std::string, std::string> versions;
    };

    /// Validates the parts against each other. Throws Error(EngineNotReady)
    /// when a model does not fit its vocabulary and Error(UnsafeThesaurus)
    /// for unsafe alternatives.
    EngineContext(Parts parts, EngineOptions options);

    /// Loads every artifact or throws; never returns a partial engine.
    static std::shared_ptr<const EngineContext> load(const EnginePaths& paths, EngineOptions options);

    const RuleSet& rules() const noexcept { return rules_; }
    const ToxicityLexicon& toxicity() const noexcept { return *toxicity_; }
    const ValenceLexicon& valence() const noexcept { return valence_; }
    const BinaryArtifact& binary() const noexcept { return binary_; }
    const MultiLabelArtifact& multilabel() const noexcept { return multilabel_; }
    const MilderThesaurus& thesaurus() const noexcept { return thesaurus_; }
    const Scorer& scorer() const noexcept { return scorer_; }
    const EngineOptions& options() const noexcept { return options_; }
    const std::map<std::string, std::string>& versions() const noexcept { return versions_; }
    ParaphraseContext paraphrase_context() const;

private:
    RuleSet rules_;
    std::shared_ptr<const ToxicityLexicon> toxicity_;
    ValenceLexicon valence_;
    BinaryArtifact binary_;
    MultiLabelArtifact multilabel_;
    MilderThesaurus thesaurus_;
    EngineOptions options_;
    Scorer scorer_;
    std::optional<RewriterClient> rewriter_;
    std::map<std::string, std::string> versions_;
};

/// Holder for the current engine snapshot. Readers keep the snapshot they got
/// alive for as long as they need it, so a swap never disturbs them.
class EngineHandle {
public:
    explicit EngineHandle(std::shared_ptr<const EngineContext> engine = nullptr) : engine_(std::move(engine)) {}

    std::shared_ptr<const EngineContext> get() const {
        std::lock_guard lock(mu_);
        return engine_;
    }
    void replace(std::shared_ptr<const EngineContext> engine) {
        std::lock_guard lock(mu_);
        engine_ = std::move(engine);
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const EngineContext> engine_;
};

struct PhaseTimings {
    double detect = 0.0;
    double classify = 0.0;
    double highlight = 0.0;
    double paraphrase = 0.0;
};

struct AnalysisReport {
    Verdict verdict = Verdict::Clean;
    Mode mode = Mode::Sensitive;
    ClassSet classes;
    ToxicityScore score;
    Band band = Band::Clean;
    std::vector<RuleMatch> matches;
    SentimentResult sentiment;
    Prediction classifier;
    std::vector<ParaphraseSuggestion> suggestions;  ///< three when offensive, else none
    std::map<std::string, std::string> versions;
    PhaseTimings timing_ms;
};

struct AnalyzeOptions {
    std::optional<Mode> mode;  ///< overrides the engine default
    bool suggestions = true;   ///< bulk scans skip phase 4
};

/// Four phases: verdict, classes, highlight spans, suggestions. Throws
/// Error(InputTooLarge) or Error(InvalidEncoding) from normalization.
AnalysisReport analyze(std::string_view body, const EngineContext& ctx, const AnalyzeOptions& opts = {});

/// Spans to paraphrase when the offence has no rule match: every occurrence of
/// a contributing lexicon term, or the whole trimmed text when there is none.
std::vector<Span> spanless_targets(const NormalizedText& norm, const ToxicityScore& local_score);

/// Timings are left out unless asked for, so equal inputs give equal bytes.
nlohmann::ordered_json to_json(const AnalysisReport& report, bool include_timing = false);
nlohmann::ordered_json to_json(const RuleMatch& match);
nlohmann::ordered_json to_json(const ParaphraseSuggestion& suggestion);

enum class Marker { Brackets, Ansi };

/// Brackets: ⟦surface|Class1,Class2⟧. Ansi: underlined surface. Overlapping
/// spans are merged first, their classes united.
std::string render_highlights(std::string_view body, const std::vector<RuleMatch>& matches, Marker marker);

}  // namespace crs
