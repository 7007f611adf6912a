#include "crs/ml.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"
#include "crs/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace crs {

// ---------------------------------------------------------------- vocabulary

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs)
    : terms_(std::move(terms)), df_(std::move(df)), n_docs_(n_docs) {
    if (terms_.size() != df_.size()) throw Error(ErrorCode::InvalidConfig, "vocabulary terms/df length differ");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0 && !(terms_[i - 1] < terms_[i])) {
            throw Error(ErrorCode::InvalidConfig, "vocabulary terms must be sorted and unique");
        }
        if (df_[i] == 0 || df_[i] > n_docs_) throw Error(ErrorCode::InvalidConfig, "df out of range for " + terms_[i]);
        index_.emplace(terms_[i], i);
    }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

double Vocabulary::idf(std::size_t column) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_.at(column)))) + 1.0;
}

void VocabularyBuilder::add(const NormalizedText& doc) {
    std::set<std::string_view> seen;
    for (const auto& t : doc.tokens()) {
        if (t.is_word && seen.insert(t.text).second) ++df_[t.text];
    }
    ++n_docs_;
}

Vocabulary VocabularyBuilder::build(std::size_t min_df) const {
    if (n_docs_ == 0) throw Error(ErrorCode::EmptyCorpus, "cannot fit a vocabulary on zero documents");
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [term, df] : df_) {
        if (df >= min_df) kept.emplace_back(term, df);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> terms;
    std::vector<std::size_t> df;
    for (auto& [t, d] : kept) {
        terms.push_back(std::move(t));
        df.push_back(d);
    }
    return Vocabulary(std::move(terms), std::move(df), n_docs_);
}

Vocabulary fit_tfidf(std::span<const NormalizedText> corpus, std::size_t min_df) {
    VocabularyBuilder b;
    for (const auto& doc : corpus) b.add(doc);
    return b.build(min_df);
}

// ---------------------------------------------------------------- features

double FeatureVector::at(std::size_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::size_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
}

FeatureVector vectorize(const Vocabulary& vocab, const NormalizedText& norm, int regex_flag,
                        const SentimentResult& senti) {
    std::map<std::size_t, double> counts;
    for (const auto& t : norm.tokens()) {
        if (!t.is_word) continue;
        auto idx = vocab.index_of(t.text);
        if (idx >= 0) counts[static_cast<std::size_t>(idx)] += 1.0;
    }
    FeatureVector fv;
    fv.dim = vocab.feature_dim();
    double sq = 0.0;
    for (auto& [idx, value] : counts) {
        value *= vocab.idf(idx);
        sq += value * value;
    }
    const double norm2 = std::sqrt(sq);
    for (const auto& [idx, value] : counts) fv.entries.emplace_back(idx, value / norm2);

    const std::size_t v = vocab.size();
    if (regex_flag) fv.entries.emplace_back(v, 1.0);
    if (senti.compound != 0.0) fv.entries.emplace_back(v + 1, senti.compound);
    std::size_t hot = senti.label == Polarity::Positive ? 2 : (senti.label == Polarity::Negative ? 3 : 4);
    fv.entries.emplace_back(v + hot, 1.0);
    return fv;
}

FeatureVector FeatureExtractor::extract(const Vocabulary& vocab, const NormalizedText& norm) const {
    if (!rules || !valence) throw Error(ErrorCode::InvalidConfig, "feature extractor is missing rules or valences");
    return vectorize(vocab, norm, rules->matches_any(norm) ? 1 : 0, analyze_sentiment(norm, *valence));
}

FeatureVector FeatureExtractor::extract(const Vocabulary& vocab, std::string_view text) const {
    return extract(vocab, normalize(text, normalize_options));
}

// ---------------------------------------------------------------- augmentation

std::string augment(const NormalizedText& norm, const Thesaurus& thesaurus, const WordList& stopwords,
                    std::size_t k, std::uint64_t seed) {
    if (k == 0) return norm.original();
    std::vector<const Token*> eligible;
    for (const auto& t : norm.tokens()) {
        if (t.is_word && !stopwords.contains(t.text) && thesaurus.lookup(t.text)) eligible.push_back(&t);
    }
    if (eligible.empty()) return norm.original();

    Rng rng(seed);
    rng.shuffle(std::span<const Token*>(eligible));
    eligible.resize(std::min(k, eligible.size()));
    std::sort(eligible.begin(), eligible.end(), [](const Token* a, const Token* b) { return a->start < b->start; });

    const std::string& src = norm.original();
    std::string out;
    std::size_t pos = 0;
    for (const Token* t : eligible) {
        out.append(src, pos, t->start - pos);
        std::string synonym = thesaurus.lookup(t->text)->front();
        if (src[t->start] >= 'A' && src[t->start] <= 'Z' && synonym[0] >= 'a' && synonym[0] <= 'z') {
            synonym[0] = static_cast<char>(synonym[0] - 'a' + 'A');
        }
        out += synonym;
        pos = t->end;
    }
    out.append(src, pos);
    return out;
}

std::vector<LabelledText> read_labelled_jsonl(std::istream& in, int label) {
    std::vector<LabelledText> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string()) {
            throw ParseError(lineno, "expected an object with a string \"text\"");
        }
        LabelledText t{j["text"].get<std::string>(), label, {}};
        if (j.contains("label")) {
            const auto& l = j["label"];
            if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
                throw ParseError(lineno, "\"label\" must be 0 or 1");
            }
            t.label = l.get<int>();
        }
        if (j.contains("classes")) {
            if (!j["classes"].is_array()) throw ParseError(lineno, "\"classes\" must be an array");
            for (const auto& c : j["classes"]) {
                auto cls = c.is_string() ? parse_offence_class(c.get<std::string>()) : std::nullopt;
                if (!cls) throw ParseError(lineno, "unknown class " + c.dump());
                t.classes.insert(*cls);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<LabelledText> read_labelled_jsonl_file(const std::string& path, int label) {
    auto in = open_input(path);
    return read_labelled_jsonl(in, label);
}

void write_labelled_jsonl(std::ostream& out, std::span<const LabelledText> texts) {
    for (const auto& t : texts) {
        nlohmann::ordered_json j = {{"text", t.text}, {"label", t.label}};
        if (!t.classes.empty()) j["classes"] = t.classes.names();
        out << j.dump() << '\n';
    }
}

std::vector<LabelledText> build_training_corpus(const std::vector<LabelledText>& offensive,
                                                const std::vector<LabelledText>& clean, const Thesaurus& thesaurus,
                                                const WordList& stopwords, const RuleSet& rules, std::uint64_t seed,
                                                const CorpusBuildOptions& opts) {
    if (offensive.empty()) throw Error(ErrorCode::EmptyInput, "no offensive examples");
    if (clean.size() != offensive.size()) {
        throw Error(ErrorCode::SizeMismatch, "need as many clean examples as offensive ones (" +
                                                 std::to_string(clean.size()) + " vs " +
                                                 std::to_string(offensive.size()) + ")");
    }
    std::vector<LabelledText> out;
    out.reserve(offensive.size() * 4);
    for (const auto& r : offensive) out.push_back({r.text, 1, r.classes});
    for (const auto& r : clean) out.push_back({r.text, 0, {}});

    for (std::size_t i = 0; i < clean.size(); ++i) {
        auto base = normalize(clean[i].text);
        for (std::uint64_t copy = 0; copy < 2; ++copy) {
            const auto stream = derive_seed(seed, 2 * i + copy);
            std::string chosen = clean[i].text;
            for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
                auto candidate = augment(base, thesaurus, stopwords, opts.augment_words, derive_seed(stream, attempt));
                if (candidate == clean[i].text) break;
                if (!rules.matches_any(normalize(candidate))) {
                    chosen = std::move(candidate);
                    break;
                }
            }
            out.push_back({std::move(chosen), 0, {}});
        }
    }
    return out;
}

Vocabulary fit_tfidf_texts(std::span<const LabelledText> texts, std::size_t min_df, const NormalizeOptions& opts) {
    VocabularyBuilder b;
    for (const auto& t : texts) b.add(normalize(t.text, opts));
    return b.build(min_df);
}

std::vector<Example> featurize(std::span<const LabelledText> texts, const Vocabulary& vocab,
                               const FeatureExtractor& extractor) {
    std::vector<Example> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back({extractor.extract(vocab, t.text), t.label, t.classes});
    return out;
}

// ---------------------------------------------------------------- training

std::string_view to_string(Loss l) { return l == Loss::Hinge ? "hinge" : "logistic"; }

Loss parse_loss(std::string_view name) {
    if (name == "hinge") return Loss::Hinge;
    if (name == "logistic") return Loss::Logistic;
    throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
    if (!(l2 >= 0.0)) throw Error(ErrorCode::InvalidConfig, "l2 must be >= 0");
}

std::string fingerprint(std::span<const Example> data) {
    std::uint64_t h = fnv1a("");
    auto mix = [&h](std::uint64_t v) {
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        h = fnv1a(std::string_view(bytes, 8), h);
    };
    for (const auto& ex : data) {
        mix(static_cast<std::uint64_t>(ex.label));
        mix(ex.x.dim);
        mix(ex.x.entries.size());
        for (const auto& [idx, value] : ex.x.entries) {
            mix(idx);
            mix(std::bit_cast<std::uint64_t>(value));
        }
    }
    return hex64(h);
}

namespace {

void check_dims(std::span<const Example> data, std::size_t dim) {
    for (const auto& ex : data) {
        if (ex.x.dim != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "feature vector has " + std::to_string(ex.x.dim) + " slots, expected " + std::to_string(dim));
        }
    }
}

LinearModel sgd(std::span<const Example> data, const std::vector<int>& labels, std::size_t dim,
                const TrainConfig& cfg, std::uint64_t seed) {
    // Weights are kept as scale * v so the L2 shrink is O(1) per step.
    std::vector<double> v(dim, 0.0);
    double scale = 1.0;
    double bias = 0.0;
    std::vector<std::size_t> order(data.size());
    Rng rng(seed);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t i : order) {
            const auto& x = data[i].x;
            const double y = labels[i] ? 1.0 : -1.0;
            double dot = 0.0;
            for (const auto& [idx, value] : x.entries) dot += v[idx] * value;
            const double margin = scale * dot + bias;

            double dloss = 0.0;
            if (cfg.loss == Loss::Hinge) {
                if (y * margin < 1.0) dloss = -y;
            } else {
                dloss = -y / (1.0 + std::exp(y * margin));
            }

            const double eta = cfg.learning_rate / (1.0 + cfg.learning_rate * cfg.l2 * static_cast<double>(t));
            scale *= 1.0 - eta * cfg.l2;
            if (scale < 1e-9) {
                for (double& w : v) w *= scale;
                scale = 1.0;
            }
            if (dloss != 0.0) {
                const double step = -eta * dloss / scale;
                for (const auto& [idx, value] : x.entries) v[idx] += step * value;
                bias -= eta * dloss;
            }
            ++t;
        }
    }
    LinearModel m;
    m.loss = cfg.loss;
    m.weights.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) m.weights[i] = scale * v[i];
    m.bias = bias;
    m.trained_on = fingerprint(data);
    return m;
}

}  // namespace

LinearModel train_binary(std::span<const Example> data, const Vocabulary& vocab, const TrainConfig& cfg) {
    cfg.validate();
    check_dims(data, vocab.feature_dim());
    std::vector<int> labels;
    labels.reserve(data.size());
    bool pos = false, neg = false;
    for (const auto& ex : data) {
        labels.push_back(ex.label ? 1 : 0);
        (ex.label ? pos : neg) = true;
    }
    if (!pos || !neg) throw Error(ErrorCode::SingleClassDataset, "training data needs both labels");
    return sgd(data, labels, vocab.feature_dim(), cfg, cfg.seed);
}

MultiLabelModel train_multilabel(std::span<const Example> data, const Vocabulary& vocab, const TrainConfig& cfg) {
    cfg.validate();
    check_dims(data, vocab.feature_dim());
    MultiLabelModel out;
    std::array<std::vector<int>, 3> labels;
    for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
        bool pos = false, neg = false;
        for (const auto& ex : data) {
            int y = ex.classes.contains(kAllClasses[c]) ? 1 : 0;
            labels[c].push_back(y);
            (y ? pos : neg) = true;
        }
        if (!pos || !neg) {
            throw Error(ErrorCode::ClassMissing, std::string(to_string(kAllClasses[c])) + " lacks " +
                                                     (pos ? "negative" : "positive") + " examples");
        }
    }
    for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
        out.per_class[c] = sgd(data, labels[c], vocab.feature_dim(), cfg, derive_seed(cfg.seed, c));
    }
    return out;
}

double mean_loss(const LinearModel& model, std::span<const Example> data, double l2,
                 const std::vector<int>& labels) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no examples");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = labels.at(i) ? 1.0 : -1.0;
        const double z = y * predict(model, data[i].x).margin;
        // log(1 + e^-z) without overflow for large |z|
        sum += model.loss == Loss::Hinge ? std::max(0.0, 1.0 - z)
                                         : (z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)));
    }
    double norm2 = 0.0;
    for (double w : model.weights) norm2 += w * w;
    return sum / static_cast<double>(data.size()) + 0.5 * l2 * norm2;
}

TrainingResult train_from_texts(const TrainingRequest& request, const TrainingResources& res) {
    if (!res.thesaurus || !res.stopwords || !res.rules || !res.valence) {
        throw Error(ErrorCode::EngineNotReady, "training needs a thesaurus, stopwords, a ruleset and a valence lexicon");
    }
    request.config.validate();
    auto corpus = build_training_corpus(request.offensive, request.clean, *res.thesaurus, *res.stopwords, *res.rules,
                                        request.config.seed, request.corpus);
    TrainingResult out;
    out.total = corpus.size();
    for (const auto& t : corpus) (t.label ? out.offensive : out.non_offensive) += 1;
    out.vocab = fit_tfidf_texts(corpus, request.min_df, res.normalize_options);
    FeatureExtractor extractor{res.rules, res.valence, res.normalize_options};
    auto data = featurize(corpus, out.vocab, extractor);

    if (request.multilabel) {
        out.multilabel = train_multilabel(data, out.vocab, request.config);
        double sum = 0.0;
        for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
            std::vector<int> labels;
            for (const auto& ex : data) labels.push_back(ex.classes.contains(kAllClasses[c]) ? 1 : 0);
            sum += mean_loss(out.multilabel.per_class[c], data, request.config.l2, labels);
        }
        out.final_loss = sum / static_cast<double>(kAllClasses.size());
    } else {
        out.binary = train_binary(data, out.vocab, request.config);
        std::vector<int> labels;
        for (const auto& ex : data) labels.push_back(ex.label);
        out.final_loss = mean_loss(out.binary, data, request.config.l2, labels);
    }
    return out;
}

// ---------------------------------------------------------------- prediction

Prediction predict(const LinearModel& model, const FeatureVector& fv) {
    if (fv.dim != model.weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "feature vector has " + std::to_string(fv.dim) +
                                                      " slots, model expects " + std::to_string(model.weights.size()));
    }
    double m = model.bias;
    for (const auto& [idx, value] : fv.entries) m += model.weights[idx] * value;
    return {m > 0.0 ? 1 : 0, m};
}

std::array<double, 3> class_margins(const MultiLabelModel& model, const FeatureVector& fv) {
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) out[c] = predict(model.per_class[c], fv).margin;
    return out;
}

ClassSet classes_from_margins(const std::array<double, 3>& margins) {
    ClassSet out;
    std::size_t best = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (margins[c] > 0.0) out.insert(kAllClasses[c]);
        if (margins[c] > margins[best]) best = c;
    }
    if (out.empty()) out.insert(kAllClasses[best]);
    return out;
}

ClassSet predict_classes(const MultiLabelModel& model, const FeatureVector& fv) {
    return classes_from_margins(class_margins(model, fv));
}

// ---------------------------------------------------------------- evaluation

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics metrics(std::size_t hit, std::size_t false_alarm, std::size_t miss) {
    ClassMetrics m;
    m.precision = ratio(hit, hit + false_alarm);
    m.recall = ratio(hit, hit + miss);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.support = hit + miss;
    return m;
}

}  // namespace

EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    const std::size_t n = tp + fp + fn + tn;
    if (n == 0) throw Error(ErrorCode::EmptyDataset, "nothing to evaluate");
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.tn = tn;
    r.accuracy = ratio(tp + tn, n);
    r.positive = metrics(tp, fp, fn);
    r.negative = metrics(tn, fn, fp);
    return r;
}

EvalReport evaluate(const LinearModel& model, std::span<const Example> data) {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& ex : data) {
        int p = predict(model, ex.x).label;
        if (p && ex.label) ++tp;
        else if (p) ++fp;
        else if (ex.label) ++fn;
        else ++tn;
    }
    return report_from_counts(tp, fp, fn, tn);
}

std::array<EvalReport, 3> evaluate_multilabel(const MultiLabelModel& model, std::span<const Example> data) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to evaluate");
    std::array<std::array<std::size_t, 4>, 3> counts{};
    for (const auto& ex : data) {
        auto predicted = predict_classes(model, ex.x);
        for (std::size_t c = 0; c < 3; ++c) {
            bool p = predicted.contains(kAllClasses[c]);
            bool y = ex.classes.contains(kAllClasses[c]);
            ++counts[c][p && y ? 0 : p ? 1 : y ? 2 : 3];
        }
    }
    std::array<EvalReport, 3> out;
    for (std::size_t c = 0; c < 3; ++c) out[c] = report_from_counts(counts[c][0], counts[c][1], counts[c][2], counts[c][3]);
    return out;
}

// ---------------------------------------------------------------- persistence

namespace {

using nlohmann::json;

json vocab_json(const Vocabulary& vocab) {
    return {{"terms", vocab.terms()}, {"df", vocab.df()}, {"n_docs", vocab.n_docs()}};
}

json parse_artifact(std::istream& in, std::string_view kind) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptModel, std::string("unreadable model: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw Error(ErrorCode::CorruptModel, "missing format_version");
    }
    auto version = doc["format_version"].get<long long>();
    if (version != kModelFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "model format " + std::to_string(version) + ", this build reads " +
                                                    std::to_string(kModelFormatVersion));
    }
    if (doc.value("kind", "") != kind) {
        throw Error(ErrorCode::CorruptModel, "expected a " + std::string(kind) + " model");
    }
    return doc;
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptModel, std::string("malformed model: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptModel) throw;
        throw Error(ErrorCode::CorruptModel, std::string("malformed model: ") + e.what());
    }
}

Vocabulary vocab_from(const json& doc) {
    const auto& v = doc.at("vocab");
    return Vocabulary(v.at("terms").get<std::vector<std::string>>(), v.at("df").get<std::vector<std::size_t>>(),
                      v.at("n_docs").get<std::size_t>());
}

LinearModel linear_from(const json& weights, const json& bias, Loss loss, std::string trained_on, std::size_t dim) {
    LinearModel m;
    m.loss = loss;
    m.weights = weights.get<std::vector<double>>();
    m.bias = bias.get<double>();
    m.trained_on = std::move(trained_on);
    if (m.weights.size() != dim) throw Error(ErrorCode::CorruptModel, "weight length does not match vocabulary");
    return m;
}

}  // namespace

void save_model(const Vocabulary& vocab, const LinearModel& model, std::ostream& out) {
    json doc = {{"format_version", kModelFormatVersion},
                {"kind", "binary"},
                {"loss", to_string(model.loss)},
                {"vocab", vocab_json(vocab)},
                {"weights", model.weights},
                {"bias", model.bias},
                {"trained_on", model.trained_on}};
    out << doc.dump() << '\n';
}

void save_model(const Vocabulary& vocab, const MultiLabelModel& model, std::ostream& out) {
    json weights = json::array();
    json bias = json::array();
    json classes = json::array();
    for (std::size_t c = 0; c < 3; ++c) {
        weights.push_back(model.per_class[c].weights);
        bias.push_back(model.per_class[c].bias);
        classes.push_back(to_string(kAllClasses[c]));
    }
    json doc = {{"format_version", kModelFormatVersion},
                {"kind", "multilabel"},
                {"loss", to_string(model.per_class[0].loss)},
                {"vocab", vocab_json(vocab)},
                {"classes", classes},
                {"weights", weights},
                {"bias", bias},
                {"trained_on", model.per_class[0].trained_on}};
    out << doc.dump() << '\n';
}

BinaryArtifact load_binary_model(std::istream& in) {
    auto doc = parse_artifact(in, "binary");
    return guarded([&] {
        BinaryArtifact a;
        a.vocab = vocab_from(doc);
        a.model = linear_from(doc.at("weights"), doc.at("bias"), parse_loss(doc.at("loss").get<std::string>()),
                              doc.at("trained_on").get<std::string>(), a.vocab.feature_dim());
        return a;
    });
}

MultiLabelArtifact load_multilabel_model(std::istream& in) {
    auto doc = parse_artifact(in, "multilabel");
    return guarded([&] {
        MultiLabelArtifact a;
        a.vocab = vocab_from(doc);
        const auto& classes = doc.at("classes");
        if (classes != json{"Personal", "Racial", "Swearing"}) {
            throw Error(ErrorCode::CorruptModel, "classes must be Personal, Racial, Swearing");
        }
        const auto& weights = doc.at("weights");
        const auto& bias = doc.at("bias");
        if (weights.size() != 3 || bias.size() != 3) throw Error(ErrorCode::CorruptModel, "expected three models");
        auto loss = parse_loss(doc.at("loss").get<std::string>());
        auto trained_on = doc.at("trained_on").get<std::string>();
        for (std::size_t c = 0; c < 3; ++c) {
            a.model.per_class[c] = linear_from(weights[c], bias[c], loss, trained_on, a.vocab.feature_dim());
        }
        return a;
    });
}

BinaryArtifact load_binary_model_file(const std::string& path) {
    auto in = open_input(path);
    return load_binary_model(in);
}

MultiLabelArtifact load_multilabel_model_file(const std::string& path) {
    auto in = open_input(path);
    return load_multilabel_model(in);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double test_fraction,
                                                                            std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidFraction, "test fraction must lie in [0, 1)");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 0.5));
    std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {std::move(train), std::move(test)};
}

}  // namespace crs
