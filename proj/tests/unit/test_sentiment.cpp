#include "doctest.h"

#include "crs/error.hpp"
#include "crs/sentiment.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace crs;

namespace {

const ValenceLexicon& shipped() {
    static const ValenceLexicon lex = ValenceLexicon::load_dir(test::data_path("lexicons"));
    return lex;
}

double compound_of(double x) { return x / std::sqrt(x * x + 15.0); }

SentimentResult run(const std::string& text) { return analyze_sentiment(normalize(text), shipped()); }

std::vector<std::string> sorted_terms(const ValenceLexicon& lex) {
    std::vector<std::string> out;
    for (const auto& [t, v] : lex.valences()) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("hand-derived values") {
    auto r = run("");
    CHECK(r.compound == 0.0);
    CHECK(r.label == Polarity::Neutral);

    REQUIRE(shipped().valence("good"));
    CHECK(*shipped().valence("good") == 1.9);

    r = run("good");
    CHECK(std::abs(r.compound - 0.4404) < 1e-4);
    CHECK(r.label == Polarity::Positive);

    r = run("not good");
    CHECK(std::abs(r.compound - (-0.3412)) < 1e-4);
    CHECK(r.label == Polarity::Negative);
}

TEST_CASE("rule constants") {
    CHECK(run("very good").compound == doctest::Approx(compound_of(1.9 + 0.293)));
    CHECK(run("slightly good").compound == doctest::Approx(compound_of(1.9 - 0.293)));
    // negation applies first, the booster then pushes further along the new sign
    CHECK(run("not very good").compound == doctest::Approx(compound_of(-0.74 * 1.9 - 0.293)));
    // the negator may sit up to three words back
    CHECK(run("not a very good").compound == doctest::Approx(compound_of(-0.74 * 1.9 - 0.293)));
    CHECK(run("not it is a good").compound == doctest::Approx(compound_of(1.9)));
    // capitals count only in mixed-case text
    CHECK(run("GOOD stuff").compound == doctest::Approx(compound_of(1.9 + 0.733)));
    CHECK(run("GOOD STUFF").compound == doctest::Approx(compound_of(1.9)));
    // trailing exclamation marks, at most three
    CHECK(run("good!!").compound == doctest::Approx(compound_of(1.9 + 2 * 0.292)));
    CHECK(run("good!!!!!").compound == doctest::Approx(compound_of(1.9 + 3 * 0.292)));
    CHECK(run("not good!").compound == doctest::Approx(compound_of(-0.74 * 1.9 - 0.292)));
    CHECK(run("the build!").compound == 0.0);
    // negators and boosters carry no valence
    CHECK(run("no").compound == doctest::Approx(compound_of(-1.2)));
    CHECK(run("not").compound == 0.0);
    CHECK(run("very").compound == 0.0);
}

TEST_CASE("lexicon files") {
    std::istringstream v("good\t1.9\n"), b("very\t0.293\n"), n("not\n");
    auto lex = ValenceLexicon::load(v, b, n);
    CHECK(lex.valences().size() == 1);
    CHECK(lex.is_negator("not"));

    std::istringstream bad_v("good\t9\n"), b2(""), n2("");
    CHECK_THROWS_AS(ValenceLexicon::load(bad_v, b2, n2), ParseError);
    std::istringstream bad_n("a\tb\n"), v3(""), b3("");
    CHECK_THROWS_AS(ValenceLexicon::load(v3, b3, bad_n), ParseError);

    CHECK(shipped().valences().size() >= 1000);
    CHECK(shipped().valences().size() <= 2000);
}

TEST_CASE("property: compound bounds over random token sequences") {
    auto terms = sorted_terms(shipped());
    const std::vector<std::string> extras = {"not", "never", "very", "slightly", "!", "!!!", "the", "code"};
    Rng rng(2718);
    for (int trial = 0; trial < 10000; ++trial) {
        std::string text;
        auto n = rng.index(12);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::string w = rng.index(3) ? terms[rng.index(terms.size())] : extras[rng.index(extras.size())];
            if (rng.index(5) == 0) std::transform(w.begin(), w.end(), w.begin(), ::toupper);
            text += w + " ";
        }
        auto r = run(text);
        REQUIRE(r.compound >= -1.0);
        REQUIRE(r.compound <= 1.0);
        REQUIRE(r.label == polarity_of(r.compound));
    }
}

TEST_CASE("property: negation flips every lexicon term with |valence| >= 0.1") {
    std::size_t checked = 0;
    for (const auto& term : sorted_terms(shipped())) {
        double v = *shipped().valence(term);
        if (std::abs(v) < 0.1) continue;
        CAPTURE(term);
        auto plain = run(term).label;
        auto negated = run("not " + term).label;
        REQUIRE(plain != Polarity::Neutral);
        REQUIRE(negated != Polarity::Neutral);
        REQUIRE(plain != negated);
        ++checked;
    }
    CHECK(checked == shipped().valences().size());
}

TEST_CASE("property: appending a positive word never lowers the compound") {
    // Lowercase words only and no trailing '!', so the appended word cannot
    // alter capital emphasis or exclamation handling of the prefix.
    auto terms = sorted_terms(shipped());
    std::vector<std::string> positives;
    for (const auto& t : terms) {
        if (*shipped().valence(t) > 0) positives.push_back(t);
    }
    const std::vector<std::string> extras = {"very", "slightly", "the", "code", "review", "not"};
    Rng rng(1618);
    for (int trial = 0; trial < 5000; ++trial) {
        std::vector<std::string> words;
        auto n = rng.index(8);
        for (std::uint64_t i = 0; i < n; ++i) {
            words.push_back(rng.index(2) ? terms[rng.index(terms.size())] : extras[rng.index(extras.size())]);
        }
        // keep the appended word outside any negation window
        words.insert(words.end(), {"the", "the", "the"});
        std::string text;
        for (const auto& w : words) text += w + " ";
        auto before = run(text).compound;
        auto after = run(text + positives[rng.index(positives.size())]).compound;
        CAPTURE(text);
        REQUIRE(after >= before);
    }
}

TEST_CASE("determinism depends only on the token sequence") {
    CHECK(run("good   job").compound == run("good job").compound);
    CHECK(run("Good job").compound == run("good job").compound);
}
