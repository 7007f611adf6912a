#pragma once

#include "crs/normalizer.hpp"
#include "crs/rules.hpp"
#include "crs/sentiment.hpp"
#include "crs/thesaurus.hpp"
#include "crs/types.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crs {

inline constexpr int kModelFormatVersion = 1;
/// Slots appended after the tf-idf block: regex flag, compound, one-hot polarity.
inline constexpr std::size_t kAuxFeatures = 5;

class Vocabulary {
public:
    Vocabulary() = default;
    /// `terms` must be sorted and unique; df[i] <= n_docs.
    Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs);

    std::size_t size() const noexcept { return terms_.size(); }
    std::size_t n_docs() const noexcept { return n_docs_; }
    std::size_t feature_dim() const noexcept { return terms_.size() + kAuxFeatures; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<std::size_t>& df() const noexcept { return df_; }

    /// Column of `term`, or -1.
    std::ptrdiff_t index_of(std::string_view term) const;
    /// ln((1 + N) / (1 + df)) + 1
    double idf(std::size_t column) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_docs_ == b.n_docs_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::size_t> df_;
    std::size_t n_docs_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Streaming document-frequency counter so large corpora need not be held
/// in memory as NormalizedText.
class VocabularyBuilder {
public:
    void add(const NormalizedText& doc);
    std::size_t n_docs() const noexcept { return n_docs_; }
    /// Throws Error(EmptyCorpus) when no document was added.
    Vocabulary build(std::size_t min_df = 2) const;

private:
    std::unordered_map<std::string, std::size_t> df_;
    std::size_t n_docs_ = 0;
};

Vocabulary fit_tfidf(std::span<const NormalizedText> corpus, std::size_t min_df = 2);

struct FeatureVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::size_t, double>> entries;  ///< sorted by index, nonzero only

    double at(std::size_t index) const;
};

/// Raw-count tf times idf over in-vocabulary word tokens, L2-normalized, then
/// [regex_flag, compound, positive, negative, neutral].
FeatureVector vectorize(const Vocabulary& vocab, const NormalizedText& norm, int regex_flag,
                        const SentimentResult& senti);

/// Everything needed to turn a text into a feature vector.
struct FeatureExtractor {
    const RuleSet* rules = nullptr;
    const ValenceLexicon* valence = nullptr;
    NormalizeOptions normalize_options;

    FeatureVector extract(const Vocabulary& vocab, const NormalizedText& norm) const;
    FeatureVector extract(const Vocabulary& vocab, std::string_view text) const;
};

/// Replaces up to k seeded-randomly chosen eligible words (not stopwords, with
/// a thesaurus entry) by their first synonym. Everything else is kept byte
/// for byte; a capitalized original keeps its leading capital.
std::string augment(const NormalizedText& norm, const Thesaurus& thesaurus, const WordList& stopwords,
                    std::size_t k, std::uint64_t seed);

struct LabelledText {
    std::string text;
    int label = 0;      ///< 1 offensive, 0 clean
    ClassSet classes;   ///< offence classes for offensive records

    friend bool operator==(const LabelledText&, const LabelledText&) = default;
};

/// JSONL of {"text": str, "label"?: 0|1, "classes"?: [str]}; records without
/// a label get `label`.
/// Blank lines are skipped; anything else malformed raises ParseError.
std::vector<LabelledText> read_labelled_jsonl(std::istream& in, int label);
std::vector<LabelledText> read_labelled_jsonl_file(const std::string& path, int label);
/// Writes text, label and (when nonempty) classes.
void write_labelled_jsonl(std::ostream& out, std::span<const LabelledText> texts);

struct CorpusBuildOptions {
    std::size_t augment_words = 2;
    std::size_t max_attempts = 4;  ///< augmentation retries before falling back to the original text
};

/// offensive (label 1) + clean (label 0) + two augmented copies of every clean
/// text (label 0); total 4n. Augmented copies that trip a rule are retried
/// with another seed and finally replaced by the unmodified clean text.
/// Throws Error(EmptyInput) or Error(SizeMismatch).
std::vector<LabelledText> build_training_corpus(const std::vector<LabelledText>& offensive,
                                                const std::vector<LabelledText>& clean, const Thesaurus& thesaurus,
                                                const WordList& stopwords, const RuleSet& rules, std::uint64_t seed,
                                                const CorpusBuildOptions& opts = {});

/// Vocabulary over raw texts, normalized with `opts`.
Vocabulary fit_tfidf_texts(std::span<const LabelledText> texts, std::size_t min_df = 2,
                           const NormalizeOptions& opts = {});

enum class Loss { Hinge, Logistic };
std::string_view to_string(Loss l);
Loss parse_loss(std::string_view name);

struct TrainConfig {
    std::uint64_t seed = 42;
    int epochs = 10;
    double learning_rate = 0.1;
    double l2 = 1e-4;
    Loss loss = Loss::Hinge;

    void validate() const;
};

struct Example {
    FeatureVector x;
    int label = 0;
    ClassSet classes;
};

struct LinearModel {
    Loss loss = Loss::Hinge;
    std::vector<double> weights;
    double bias = 0.0;
    std::string trained_on;  ///< fingerprint of the training examples

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct MultiLabelModel {
    std::array<LinearModel, 3> per_class;  ///< indexed like kAllClasses

    friend bool operator==(const MultiLabelModel&, const MultiLabelModel&) = default;
};

std::vector<Example> featurize(std::span<const LabelledText> texts, const Vocabulary& vocab,
                               const FeatureExtractor& extractor);

/// Fingerprint over labels and feature bits, independent of the host.
std::string fingerprint(std::span<const Example> data);

/// SGD with L2 and step size lr / (1 + lr * l2 * t); one seeded generator
/// drives a fresh Fisher-Yates permutation per epoch. Throws
/// Error(SingleClassDataset).
LinearModel train_binary(std::span<const Example> data, const Vocabulary& vocab, const TrainConfig& cfg);

/// One-vs-rest over Personal, Racial and Swearing using each example's class
/// set. Throws Error(ClassMissing) when a class lacks positives or negatives.
MultiLabelModel train_multilabel(std::span<const Example> data, const Vocabulary& vocab, const TrainConfig& cfg);

/// Average per-example loss (hinge or logistic, per the model) plus the L2
/// term 0.5 * l2 * |w|^2, for the given 0/1 labels.
double mean_loss(const LinearModel& model, std::span<const Example> data, double l2,
                 const std::vector<int>& labels);

struct Prediction {
    int label = 0;
    double margin = 0.0;
};

/// Throws Error(DimensionMismatch).
Prediction predict(const LinearModel& model, const FeatureVector& fv);
std::array<double, 3> class_margins(const MultiLabelModel& model, const FeatureVector& fv);
/// Positive-margin classes, or the single argmax class when none is positive.
ClassSet predict_classes(const MultiLabelModel& model, const FeatureVector& fv);
ClassSet classes_from_margins(const std::array<double, 3>& margins);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    ClassMetrics positive;  ///< label 1
    ClassMetrics negative;  ///< label 0
};

/// Report from confusion counts; throws Error(EmptyDataset) when all are zero.
EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
EvalReport evaluate(const LinearModel& model, std::span<const Example> data);
/// Per-class one-vs-rest reports for the final predict_classes decision.
std::array<EvalReport, 3> evaluate_multilabel(const MultiLabelModel& model, std::span<const Example> data);

struct BinaryArtifact {
    Vocabulary vocab;
    LinearModel model;
};

struct MultiLabelArtifact {
    Vocabulary vocab;
    MultiLabelModel model;
};

void save_model(const Vocabulary& vocab, const LinearModel& model, std::ostream& out);
void save_model(const Vocabulary& vocab, const MultiLabelModel& model, std::ostream& out);
/// Throw Error(VersionMismatch) for other format versions and
/// Error(CorruptModel) for anything malformed or of the other kind.
BinaryArtifact load_binary_model(std::istream& in);
MultiLabelArtifact load_multilabel_model(std::istream& in);
BinaryArtifact load_binary_model_file(const std::string& path);
MultiLabelArtifact load_multilabel_model_file(const std::string& path);

/// Inputs shared by every training run.
struct TrainingResources {
    const Thesaurus* thesaurus = nullptr;
    const WordList* stopwords = nullptr;
    const RuleSet* rules = nullptr;
    const ValenceLexicon* valence = nullptr;
    NormalizeOptions normalize_options;
};

struct TrainingRequest {
    std::vector<LabelledText> offensive;
    std::vector<LabelledText> clean;
    TrainConfig config;
    std::size_t min_df = 2;
    bool multilabel = false;
    CorpusBuildOptions corpus;
};

struct TrainingResult {
    std::size_t total = 0;
    std::size_t offensive = 0;
    std::size_t non_offensive = 0;
    Vocabulary vocab;
    LinearModel binary;           ///< set unless multilabel
    MultiLabelModel multilabel;   ///< set when multilabel
    double final_loss = 0.0;      ///< mean over classes for multilabel
};

/// Corpus construction, vocabulary, featurization and training in one call;
/// the corpus and the optimizer share config.seed.
TrainingResult train_from_texts(const TrainingRequest& request, const TrainingResources& resources);

/// Splits indices 0..n-1 into (train, test) with a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double test_fraction,
                                                                            std::uint64_t seed);

}  // namespace crs
