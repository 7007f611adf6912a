#include "doctest.h"

#include "crs/error.hpp"
#include "crs/scoring.hpp"
#include "http_stub.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

using namespace crs;

namespace {

ToxicityLexicon small_lexicon() {
    ToxicityLexicon lex;
    lex.add("slur", 0.9);
    lex.add("damn", 0.8);
    lex.add("dumb", 0.5);
    return lex;
}

ErrorCode remote_error(const ScorerConfig& cfg) {
    try {
        score_remote("hello", cfg);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("score_local examples") {
    auto lex = small_lexicon();
    auto s = score_local(normalize("a perfectly fine comment"), lex);
    CHECK(s.value == 0.0);
    CHECK(s.contributions.empty());
    CHECK(s.source == ScoreSource::Local);

    s = score_local(normalize("what a slur"), lex);
    CHECK(s.value == doctest::Approx(0.9).epsilon(1e-12));
    REQUIRE(s.contributions.size() == 1);
    CHECK(s.contributions[0].first == "slur");

    // 1 - (1 - 0.8)(1 - 0.5)
    s = score_local(normalize("dumb and damn"), lex);
    CHECK(s.value == doctest::Approx(0.9).epsilon(1e-12));
    REQUIRE(s.contributions.size() == 2);
    CHECK(s.contributions[0].first == "damn");
    CHECK(s.contributions[1].first == "dumb");

    // distinct terms only; folded spelling counts
    CHECK(score_local(normalize("dumb dumb DUMB"), lex).value == doctest::Approx(0.5));
    CHECK(score_local(normalize("d@mn"), lex).value == doctest::Approx(0.8));
}

TEST_CASE("band thresholds are inclusive at both ends") {
    ScorerConfig cfg;
    CHECK(band(0.7, cfg) == Band::OffensiveCandidate);
    CHECK(band(0.05, cfg) == Band::Clean);
    CHECK(band(0.3, cfg) == Band::Gray);
    CHECK(band(0.0, cfg) == Band::Clean);
    CHECK(band(1.0, cfg) == Band::OffensiveCandidate);
    CHECK(band(std::nextafter(0.7, 0.0), cfg) == Band::Gray);
    CHECK(band(std::nextafter(0.05, 1.0), cfg) == Band::Gray);
    CHECK(to_string(Band::OffensiveCandidate) == "offensive_candidate");
}

TEST_CASE("config validation") {
    ScorerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.clean_threshold = 0.7;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.offensive_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.remote_endpoint = "ftp://x";
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.remote_timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("lexicon file") {
    std::istringstream ok("# c\nfoo\t0.5\nbar\t1\n");
    CHECK(ToxicityLexicon::load(ok).size() == 2);
    std::istringstream zero("foo\t0\n");
    CHECK_THROWS_AS(ToxicityLexicon::load(zero), ParseError);
    std::istringstream upper("Foo\t0.5\n");
    CHECK_THROWS_AS(ToxicityLexicon::load(upper), ParseError);
    std::istringstream junk("foo\t0.5x\n");
    CHECK_THROWS_AS(ToxicityLexicon::load(junk), ParseError);

    auto lex = ToxicityLexicon::load_file(test::data_path("lexicons/toxicity.tsv"));
    CHECK(lex.size() > 100);
    std::set<double> tiers;
    for (const auto& [t, w] : lex.entries()) tiers.insert(w);
    CHECK(tiers == std::set<double>{0.3, 0.6, 0.9});
}

TEST_CASE("remote scorer against a stub") {
    test::StubServer ok("/score", [](const httplib::Request& req, httplib::Response& res) {
        auto text = req.body;
        if (req.get_header_value("X-Key") != "secret") {
            res.status = 401;
            return;
        }
        res.set_content(text.find("high") != std::string::npos ? R"({"score": 1.7})" : R"({"score": 0.83})",
                        "application/json");
    });
    ScorerConfig cfg;
    cfg.remote_endpoint = ok.url("/score");
    cfg.api_key_header = "X-Key";
    cfg.api_key = "secret";

    auto s = score_remote("hello", cfg);
    CHECK(s.value == doctest::Approx(0.83));
    CHECK(s.source == ScoreSource::Remote);
    CHECK(s.contributions.empty());
    CHECK(score_remote("high", cfg).value == 1.0);

    cfg.api_key = "wrong";
    CHECK(remote_error(cfg) == ErrorCode::RemoteMalformed);
}

TEST_CASE("remote failures") {
    test::StubServer slow("/score", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(800));
        res.set_content(R"({"score": 0.5})", "application/json");
    });
    ScorerConfig cfg;
    cfg.remote_endpoint = slow.url("/score");
    cfg.remote_timeout = std::chrono::milliseconds(150);
    CHECK(remote_error(cfg) == ErrorCode::RemoteUnavailable);

    test::StubServer bad("/score", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    cfg.remote_endpoint = bad.url("/score");
    cfg.remote_timeout = std::chrono::milliseconds(2000);
    CHECK(remote_error(cfg) == ErrorCode::RemoteMalformed);

    test::StubServer string_score("/score", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"score": "high"})", "application/json");
    });
    cfg.remote_endpoint = string_score.url("/score");
    CHECK(remote_error(cfg) == ErrorCode::RemoteMalformed);

    cfg.remote_endpoint = "http://127.0.0.1:1/score";
    CHECK(remote_error(cfg) == ErrorCode::RemoteUnavailable);

    ScorerConfig none;
    CHECK(remote_error(none) == ErrorCode::RemoteUnavailable);
}

TEST_CASE("facade falls back to the local scorer") {
    auto lex = std::make_shared<const ToxicityLexicon>(small_lexicon());
    ScorerConfig cfg;
    cfg.remote_endpoint = "http://127.0.0.1:1/score";
    cfg.remote_timeout = std::chrono::milliseconds(200);
    Scorer scorer(lex, cfg);
    auto s = scorer.score(normalize("dumb"));
    CHECK(s.source == ScoreSource::Local);
    CHECK(s.value == doctest::Approx(0.5));
    CHECK(scorer.remote_failures() == 1);

    Scorer local_only(lex, ScorerConfig{});
    CHECK(local_only.score(normalize("slur")).value == doctest::Approx(0.9));
    CHECK(local_only.remote_failures() == 0);
}

TEST_CASE("property: bounds, monotonicity and permutation invariance") {
    auto lex = ToxicityLexicon::load_file(test::data_path("lexicons/toxicity.tsv"));
    std::vector<std::string> terms;
    for (const auto& [t, w] : lex.entries()) terms.push_back(t);
    std::sort(terms.begin(), terms.end());
    const std::vector<std::string> filler = {"the", "patch", "looks", "fine", "merge", "please"};

    Rng rng(314);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> words;
        auto n = rng.index(8);
        for (std::uint64_t i = 0; i < n; ++i) {
            words.push_back(rng.index(2) ? terms[rng.index(terms.size())] : filler[rng.index(filler.size())]);
        }
        auto join = [](const std::vector<std::string>& ws) {
            std::string s;
            for (const auto& w : ws) s += w + " ";
            return s;
        };
        auto base = score_local(normalize(join(words)), lex);
        REQUIRE(base.value >= 0.0);
        REQUIRE(base.value <= 1.0);
        REQUIRE(base.contributions.empty() == (base.value == 0.0));

        auto shuffled = words;
        rng.shuffle(std::span<std::string>(shuffled));
        REQUIRE(score_local(normalize(join(shuffled)), lex).value == base.value);

        words.push_back(terms[rng.index(terms.size())]);
        REQUIRE(score_local(normalize(join(words)), lex).value >= base.value);
    }
}
