#include "doctest.h"

#include "crs/error.hpp"
#include "crs/ml.hpp"
#include "crs/synthetic.hpp"
#include "test_support.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace crs;

namespace {

const RuleSet& rules() {
    static const RuleSet rs = load_ruleset_file(test::data_path("rules/default_rules.json"));
    return rs;
}

const ValenceLexicon& valence() {
    static const ValenceLexicon lex = ValenceLexicon::load_dir(test::data_path("lexicons"));
    return lex;
}

FeatureExtractor extractor() { return {&rules(), &valence(), {}}; }

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::ParseError;
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

/// Brute-force reference: whitespace tokens, df by set membership, smoothed
/// idf, raw counts, L2 normalization.
std::map<std::string, double> reference_tfidf(const std::vector<std::string>& corpus, const std::string& doc) {
    const double n = static_cast<double>(corpus.size());
    std::map<std::string, double> df;
    for (const auto& d : corpus) {
        auto words = split_words(d);
        for (const auto& w : std::set<std::string>(words.begin(), words.end())) df[w] += 1.0;
    }
    std::map<std::string, double> out;
    for (const auto& w : split_words(doc)) {
        if (df.count(w)) out[w] += 1.0;
    }
    double sq = 0.0;
    for (auto& [w, v] : out) {
        v *= std::log((1.0 + n) / (1.0 + df[w])) + 1.0;
        sq += v * v;
    }
    for (auto& [w, v] : out) v /= std::sqrt(sq);
    return out;
}

std::pair<std::vector<Example>, std::vector<Example>> split(const std::vector<Example>& all, std::uint64_t seed) {
    auto [train_idx, test_idx] = split_indices(all.size(), 0.2, seed);
    std::vector<Example> train, test;
    for (auto i : train_idx) train.push_back(all[i]);
    for (auto i : test_idx) test.push_back(all[i]);
    return {train, test};
}

}  // namespace

TEST_CASE("fit_tfidf examples") {
    std::vector<NormalizedText> docs = {normalize("a b"), normalize("a c")};
    auto v = fit_tfidf(docs, 1);
    CHECK(v.size() == 3);
    CHECK(v.df()[static_cast<std::size_t>(v.index_of("a"))] == 2);
    CHECK(v.df()[static_cast<std::size_t>(v.index_of("b"))] == 1);
    CHECK(v.df()[static_cast<std::size_t>(v.index_of("c"))] == 1);
    CHECK(v.feature_dim() == 8);

    CHECK(code_of([] { fit_tfidf(std::vector<NormalizedText>{}); }) == ErrorCode::EmptyCorpus);

    std::vector<NormalizedText> twice = {normalize("merge this branch"), normalize("merge this branch")};
    auto t = fit_tfidf(twice, 2);
    CHECK(t.terms() == std::vector<std::string>{"branch", "merge", "this"});

    // min_df drops rare terms
    CHECK(fit_tfidf(docs, 2).terms() == std::vector<std::string>{"a"});
}

TEST_CASE("vectorize examples") {
    std::vector<NormalizedText> docs = {normalize("a b"), normalize("a c")};
    auto v = fit_tfidf(docs, 1);
    const std::size_t V = v.size();

    auto fv = vectorize(v, normalize("zzz"), 0, SentimentResult{});
    CHECK(fv.dim == V + 5);
    REQUIRE(fv.entries.size() == 1);
    CHECK(fv.entries[0] == std::pair<std::size_t, double>{V + 4, 1.0});

    // idf(a) = ln(3/3) + 1 = 1, idf(b) = ln(3/2) + 1
    fv = vectorize(v, normalize("a b"), 0, SentimentResult{});
    const double ia = 1.0, ib = std::log(1.5) + 1.0;
    const double nrm = std::sqrt(ia * ia + ib * ib);
    CHECK(std::abs(fv.at(static_cast<std::size_t>(v.index_of("a"))) - ia / nrm) < 1e-12);
    CHECK(std::abs(fv.at(static_cast<std::size_t>(v.index_of("b"))) - ib / nrm) < 1e-12);
    CHECK(fv.at(static_cast<std::size_t>(v.index_of("c"))) == 0.0);

    fv = vectorize(v, normalize("a"), 1, SentimentResult{-0.5, Polarity::Negative});
    CHECK(fv.at(V) == 1.0);
    CHECK(fv.at(V + 1) == -0.5);
    CHECK(fv.at(V + 2) == 0.0);
    CHECK(fv.at(V + 3) == 1.0);
    CHECK(fv.at(V + 4) == 0.0);
}

TEST_CASE("property: vectorize matches a brute-force reference") {
    const std::vector<std::string> alphabet = {"alpha", "beta", "gamma", "delta", "kappa",
                                               "sigma", "omega", "theta", "zeta", "lambda"};
    Rng rng(6);
    int cases = 0;
    for (int trial = 0; trial < 600; ++trial) {
        auto n_terms = 1 + rng.index(alphabet.size());
        auto n_docs = 1 + rng.index(5);
        std::vector<std::string> corpus;
        std::vector<NormalizedText> norms;
        for (std::uint64_t d = 0; d < n_docs; ++d) {
            std::string doc;
            auto len = rng.index(7);
            for (std::uint64_t i = 0; i < len; ++i) doc += alphabet[rng.index(n_terms)] + " ";
            corpus.push_back(doc);
            norms.push_back(normalize(doc));
        }
        auto vocab = fit_tfidf(norms, 1);
        std::string probe;
        auto len = rng.index(8);
        for (std::uint64_t i = 0; i < len; ++i) probe += alphabet[rng.index(alphabet.size())] + " ";

        auto fv = vectorize(vocab, normalize(probe), 0, SentimentResult{});
        auto ref = reference_tfidf(corpus, probe);
        double sq = 0.0;
        for (std::size_t col = 0; col < vocab.size(); ++col) {
            double got = fv.at(col);
            auto it = ref.find(vocab.terms()[col]);
            double want = it == ref.end() ? 0.0 : it->second;
            REQUIRE(std::abs(got - want) < 1e-9);
            sq += got * got;
        }
        REQUIRE((std::abs(std::sqrt(sq) - 1.0) < 1e-9 || sq == 0.0));
        ++cases;
    }
    CHECK(cases >= 500);
}

TEST_CASE("augment") {
    Thesaurus th;
    th.add("wrong", {"incorrect"});
    th.add("code", {"program"});
    WordList stop;
    stop.add("the");
    stop.add("code");

    auto n = normalize("the code is wrong");
    CHECK(augment(n, th, stop, 0, 1) == "the code is wrong");
    CHECK(augment(n, th, stop, 1, 1) == "the code is incorrect");
    CHECK(augment(n, th, stop, 5, 99) == "the code is incorrect");
    CHECK(augment(normalize("Wrong,  again!"), th, stop, 1, 3) == "Incorrect,  again!");
    CHECK(augment(normalize("nothing here"), th, stop, 2, 3) == "nothing here");

    Thesaurus many;
    for (const char* w : {"alpha", "beta", "gamma", "delta"}) many.add(w, {std::string(w) + "x"});
    auto text = normalize("alpha beta gamma delta");
    auto a = augment(text, many, WordList{}, 2, 77);
    CHECK(a == augment(text, many, WordList{}, 2, 77));
    CHECK(std::count(a.begin(), a.end(), 'x') == 2);
}

TEST_CASE("build_training_corpus ratio") {
    Thesaurus th;
    th.add("fix", {"repair"});
    th.add("test", {"check"});
    WordList stop;
    for (std::size_t n : {1u, 10u, 100u}) {
        std::vector<LabelledText> off, clean;
        for (std::size_t i = 0; i < n; ++i) {
            off.push_back({"you idiot " + std::to_string(i), 1, {OffenceClass::Personal}});
            clean.push_back({"please fix the test " + std::to_string(i), 0, {}});
        }
        auto ds = build_training_corpus(off, clean, th, stop, rules(), 5);
        CHECK(ds.size() == 4 * n);
        CHECK(std::count_if(ds.begin(), ds.end(), [](const auto& r) { return r.label == 0; }) == 3 * n);
        for (const auto& r : ds) {
            if (r.label == 0) CHECK(is_rule_clean(r.text, rules()));
        }
        CHECK(ds == build_training_corpus(off, clean, th, stop, rules(), 5));
    }
    std::vector<LabelledText> one = {{"x", 1, {}}};
    CHECK(code_of([&] { build_training_corpus({}, {}, th, stop, rules(), 1); }) == ErrorCode::EmptyInput);
    CHECK(code_of([&] { build_training_corpus(one, {}, th, stop, rules(), 1); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("augmentation never introduces a rule match") {
    // "silly" -> "idiot" would be unsafe; the builder must fall back.
    Thesaurus th;
    th.add("silly", {"idiot"});
    WordList stop;
    std::vector<LabelledText> off = {{"moron", 1, {}}};
    std::vector<LabelledText> clean = {{"a silly typo", 0, {}}};
    auto ds = build_training_corpus(off, clean, th, stop, rules(), 1);
    REQUIRE(ds.size() == 4);
    CHECK(ds[2].text == "a silly typo");
    CHECK(ds[3].text == "a silly typo");
}

TEST_CASE("train_binary on the separable set") {
    auto texts = synthetic::separable_dataset(500, 11);
    auto vocab = fit_tfidf_texts(texts, 1);
    auto all = featurize(texts, vocab, extractor());
    auto [train, test] = split(all, 11);
    CHECK(test.size() == 200);

    TrainConfig cfg;
    cfg.seed = 3;
    auto m1 = train_binary(train, vocab, cfg);
    auto m2 = train_binary(train, vocab, cfg);
    CHECK(m1 == m2);
    CHECK(m1.weights.size() == vocab.feature_dim());
    CHECK(evaluate(m1, test).accuracy >= 0.95);
    CHECK(predict(m1, train.front().x).label == train.front().label);

    cfg.loss = Loss::Logistic;
    auto lg = train_binary(train, vocab, cfg);
    CHECK(evaluate(lg, test).accuracy >= 0.95);

    std::vector<Example> positives;
    for (const auto& e : train) {
        if (e.label) positives.push_back(e);
    }
    CHECK(code_of([&] { train_binary(positives, vocab, cfg); }) == ErrorCode::SingleClassDataset);

    TrainConfig bad;
    bad.epochs = 0;
    CHECK(code_of([&] { train_binary(train, vocab, bad); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("train_multilabel") {
    auto texts = synthetic::disjoint_multilabel_dataset(600, 21);
    auto vocab = fit_tfidf_texts(texts, 1);
    auto all = featurize(texts, vocab, extractor());
    auto [train, test] = split(all, 21);

    auto m = train_multilabel(train, vocab, TrainConfig{});
    CHECK(m == train_multilabel(train, vocab, TrainConfig{}));
    auto reports = evaluate_multilabel(m, test);
    for (const auto& r : reports) CHECK(r.accuracy >= 0.95);
    for (const auto& e : test) CHECK(!predict_classes(m, e.x).empty());

    // one-vs-rest: a {Personal, Swearing} example is a positive for both
    std::vector<Example> without_racial;
    for (const auto& e : train) {
        if (!e.classes.contains(OffenceClass::Racial)) without_racial.push_back(e);
    }
    try {
        train_multilabel(without_racial, vocab, TrainConfig{});
        FAIL("expected ClassMissing");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ClassMissing);
        CHECK(std::string(e.what()).find("Racial") != std::string::npos);
    }
}

TEST_CASE("predict and predict_classes") {
    LinearModel m;
    m.weights.assign(7, 0.0);
    m.bias = -1.0;
    FeatureVector zero{7, {}};
    auto p = predict(m, zero);
    CHECK(p.label == 0);
    CHECK(p.margin == -1.0);
    CHECK(code_of([&] { predict(m, FeatureVector{8, {}}); }) == ErrorCode::DimensionMismatch);

    CHECK(classes_from_margins({2, -1, 0.5}) == ClassSet{OffenceClass::Personal, OffenceClass::Swearing});
    CHECK(classes_from_margins({-3, -1, -2}) == ClassSet{OffenceClass::Racial});
    CHECK(classes_from_margins({-1, -1, -1}) == ClassSet{OffenceClass::Personal});
    CHECK(classes_from_margins({0, 0, 0}) == ClassSet{OffenceClass::Personal});
}

TEST_CASE("evaluate") {
    auto r = report_from_counts(8, 2, 2, 8);
    CHECK(r.accuracy == doctest::Approx(0.8));
    CHECK(r.positive.precision == doctest::Approx(0.8));
    CHECK(r.positive.recall == doctest::Approx(0.8));
    CHECK(r.positive.f1 == doctest::Approx(0.8));
    CHECK(r.positive.support == 10);
    CHECK(report_from_counts(5, 0, 0, 5).accuracy == 1.0);
    CHECK(code_of([] { report_from_counts(0, 0, 0, 0); }) == ErrorCode::EmptyDataset);

    LinearModel m;
    m.weights.assign(6, 0.0);
    CHECK(code_of([&] { evaluate(m, std::vector<Example>{}); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("model persistence") {
    auto texts = synthetic::separable_dataset(50, 4);
    auto vocab = fit_tfidf_texts(texts, 1);
    auto data = featurize(texts, vocab, extractor());
    auto model = train_binary(data, vocab, TrainConfig{});

    std::stringstream buf;
    save_model(vocab, model, buf);
    const std::string saved = buf.str();
    auto loaded = load_binary_model(buf);
    CHECK(loaded.vocab == vocab);
    CHECK(loaded.model == model);

    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        FeatureVector fv{vocab.feature_dim(), {}};
        for (std::size_t c = 0; c < fv.dim; ++c) {
            if (rng.index(4) == 0) fv.entries.emplace_back(c, rng.unit() * 2 - 1);
        }
        REQUIRE(predict(loaded.model, fv).margin == predict(model, fv).margin);
    }

    std::istringstream truncated(saved.substr(0, saved.size() / 2));
    CHECK(code_of([&] { load_binary_model(truncated); }) == ErrorCode::CorruptModel);

    std::string future = saved;
    future.replace(future.find("\"format_version\":1"), 18, "\"format_version\":2");
    std::istringstream fut(future);
    CHECK(code_of([&] { load_binary_model(fut); }) == ErrorCode::VersionMismatch);

    std::istringstream wrong_kind(saved);
    CHECK(code_of([&] { load_multilabel_model(wrong_kind); }) == ErrorCode::CorruptModel);

    auto ml_texts = synthetic::disjoint_multilabel_dataset(60, 2);
    auto ml_vocab = fit_tfidf_texts(ml_texts, 1);
    auto ml = train_multilabel(featurize(ml_texts, ml_vocab, extractor()), ml_vocab, TrainConfig{});
    std::stringstream mbuf;
    save_model(ml_vocab, ml, mbuf);
    auto ml_loaded = load_multilabel_model(mbuf);
    CHECK(ml_loaded.model == ml);
    CHECK(ml_loaded.vocab == ml_vocab);
}
