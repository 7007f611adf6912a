#include "doctest.h"

#include "crs/error.hpp"
#include "crs/pipeline.hpp"
#include "crs/synthetic.hpp"
#include "test_support.hpp"

#include <chrono>
#include <sstream>

using namespace crs;

namespace {

const EngineContext& engine() {
    static const auto ctx = EngineContext::load(EnginePaths::defaults(), {});
    return *ctx;
}

std::vector<std::string> generator_terms() {
    return synthetic::offensive_terms(engine().rules(), engine().toxicity(), 0.0);
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("analyze examples") {
    auto r = analyze("thanks, that fixed it", engine());
    CHECK(r.verdict == Verdict::Clean);
    CHECK(r.classes.empty());
    CHECK(r.suggestions.empty());
    CHECK(r.band == Band::Clean);

    r = analyze("you are an idiot", engine());
    CHECK(r.mode == Mode::Sensitive);
    CHECK(r.verdict == Verdict::Offensive);
    CHECK(r.classes.contains(OffenceClass::Personal));
    CHECK(r.suggestions.size() == 3);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0].surface == "idiot");

    // rule match, local score 0.3: the conjunction fails
    r = analyze("you are an idiot", engine(), {Mode::Strict, true});
    CHECK(r.band == Band::Gray);
    CHECK(r.score.value == doctest::Approx(0.3));
    CHECK(r.verdict == Verdict::Clean);
    CHECK(r.suggestions.empty());

    // a strong term passes both halves
    const auto strong = synthetic::offensive_terms(engine().rules(), engine().toxicity(), 0.7);
    REQUIRE(!strong.empty());
    r = analyze("you " + strong.front(), engine(), {Mode::Strict, true});
    CHECK(r.verdict == Verdict::Offensive);
    CHECK(r.classes.contains(OffenceClass::Racial));

    r = analyze("", engine());
    CHECK(r.verdict == Verdict::Clean);

    CHECK(code_of([] { analyze(std::string(kMaxBodyBytes + 1, 'a'), engine()); }) == ErrorCode::InputTooLarge);
    CHECK(code_of([] { analyze("bad \xff byte", engine()); }) == ErrorCode::InvalidEncoding);
}

TEST_CASE("analyze without suggestions keeps the verdict") {
    auto full = analyze("you idiot", engine());
    auto bare = analyze("you idiot", engine(), {std::nullopt, false});
    CHECK(bare.verdict == full.verdict);
    CHECK(bare.classes == full.classes);
    CHECK(bare.suggestions.empty());
}

TEST_CASE("report JSON") {
    auto r = analyze("you idiot", engine());
    auto j = to_json(r);
    CHECK(j["verdict"] == "offensive");
    CHECK(j["classes"] == nlohmann::ordered_json::array({"Personal"}));
    CHECK(j["band"] == "gray");
    CHECK(j["matches"][0]["start"] == 4);
    CHECK(j["matches"][0]["end"] == 9);
    CHECK(j["suggestions"].size() == 3);
    CHECK(j["suggestions"][2]["fallback"] == true);
    CHECK(j["suggestions"][2]["strategy"] == "rewrite");
    CHECK(j["versions"]["ruleset"] == engine().rules().version());
    CHECK(!j.contains("timing_ms"));
    CHECK(to_json(r, true).contains("timing_ms"));
    // same input, same bytes
    CHECK(to_json(analyze("you idiot", engine())).dump() == j.dump());

    j = to_json(analyze("thanks, that fixed it", engine()));
    CHECK(j["verdict"] == "clean");
    CHECK(j["classes"].empty());
    CHECK(j["suggestions"].empty());
}

TEST_CASE("render_highlights") {
    auto r = analyze("you idiot", engine());
    CHECK(render_highlights("you idiot", r.matches, Marker::Brackets) == "you ⟦idiot|Personal⟧");
    CHECK(render_highlights("you idiot", r.matches, Marker::Ansi) == "you \x1b[4midiot\x1b[24m");
    CHECK(render_highlights("nothing here", {}, Marker::Brackets) == "nothing here");

    RuleMatch a{"a", {3, 8}, "", {OffenceClass::Personal}, Severity::Mild};
    RuleMatch b{"b", {5, 10}, "", {OffenceClass::Swearing}, Severity::Mild};
    CHECK(render_highlights("0123456789ab", {b, a}, Marker::Brackets) == "012⟦3456789|Personal,Swearing⟧ab");
    // touching spans stay separate
    RuleMatch c{"c", {8, 10}, "", {OffenceClass::Racial}, Severity::Mild};
    CHECK(render_highlights("0123456789", {a, c}, Marker::Brackets) == "012⟦34567|Personal⟧⟦89|Racial⟧");
    CHECK_THROWS_AS(render_highlights("short", {b}, Marker::Brackets), Error);
}

TEST_CASE("span-less offence masks lexicon terms") {
    // A lexicon term the ruleset does not know makes the score the only source.
    EngineContext::Parts parts{load_ruleset_file(test::data_path("rules/default_rules.json")),
                               ToxicityLexicon{},
                               ValenceLexicon::load_dir(test::data_path("lexicons")),
                               load_binary_model_file(test::data_path("models/binary.json")),
                               load_multilabel_model_file(test::data_path("models/multilabel.json")),
                               Thesaurus{},
                               {}};
    parts.toxicity.add("grumbleweed", 0.95);
    EngineContext ctx(std::move(parts), {});

    auto r = analyze("what a grumbleweed you are", ctx);
    CHECK(r.matches.empty());
    CHECK(r.band == Band::OffensiveCandidate);
    REQUIRE(r.verdict == Verdict::Offensive);
    CHECK(!r.classes.empty());
    REQUIRE(r.suggestions.size() == 3);
    CHECK(r.suggestions[0].text == "what a you are");
    CHECK(r.suggestions[1].text == "what a [MASK] you are");
    CHECK(r.suggestions[2].fallback);
    for (const auto& s : r.suggestions) CHECK(score_local(normalize(s.text), ctx.toxicity()).value == 0.0);

    // strict mode needs a rule hit as well
    CHECK(analyze("what a grumbleweed you are", ctx, {Mode::Strict, true}).verdict == Verdict::Clean);

    // nothing to point at: the whole trimmed text is the target
    auto targets = spanless_targets(normalize("  plain words "), ToxicityScore{});
    REQUIRE(targets.size() == 1);
    CHECK(targets[0] == Span{2, 13});
    CHECK(spanless_targets(normalize("   "), ToxicityScore{}).empty());
}

TEST_CASE("engine validation") {
    auto paths = EnginePaths::defaults();
    paths.binary_model = test::data_path("models/missing.json");
    CHECK(code_of([&] { EngineContext::load(paths, {}); }) == ErrorCode::UnreadableSource);

    // a binary model whose weights do not fit the vocabulary
    auto binary = load_binary_model_file(test::data_path("models/binary.json"));
    binary.model.weights.pop_back();
    EngineContext::Parts parts{load_ruleset_file(test::data_path("rules/default_rules.json")),
                               ToxicityLexicon::load_file(test::data_path("lexicons/toxicity.tsv")),
                               ValenceLexicon::load_dir(test::data_path("lexicons")),
                               std::move(binary),
                               load_multilabel_model_file(test::data_path("models/multilabel.json")),
                               Thesaurus{},
                               {}};
    CHECK(code_of([&] { EngineContext ctx(std::move(parts), {}); }) == ErrorCode::EngineNotReady);

    EngineOptions bad;
    bad.scorer.clean_threshold = 0.9;
    CHECK(code_of([&] { EngineContext::load(EnginePaths::defaults(), bad); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_mode("lenient"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("engine handle swaps without disturbing holders") {
    EngineHandle handle(EngineContext::load(EnginePaths::defaults(), {}));
    auto held = handle.get();
    EngineOptions strict;
    strict.mode = Mode::Strict;
    handle.replace(EngineContext::load(EnginePaths::defaults(), strict));
    CHECK(held->options().mode == Mode::Sensitive);
    CHECK(handle.get()->options().mode == Mode::Strict);
    CHECK(analyze("you idiot", *held).verdict == Verdict::Offensive);
}

TEST_CASE("property: policy monotonicity and report integrity") {
    const auto terms = generator_terms();
    Rng rng(99);
    for (int i = 0; i < 400; ++i) {
        std::string text;
        switch (i % 3) {
            case 0: text = synthetic::offensive_comment(rng, terms); break;
            case 1: text = synthetic::clean_comment(rng); break;
            default: text = test::random_text(rng, 40) + " " + terms[rng.index(terms.size())]; break;
        }
        INFO(text);
        auto strict = analyze(text, engine(), {Mode::Strict, true});
        auto sensitive = analyze(text, engine(), {Mode::Sensitive, true});
        if (strict.verdict == Verdict::Offensive) CHECK(sensitive.verdict == Verdict::Offensive);
        for (const auto* r : {&strict, &sensitive}) {
            CHECK(r->suggestions.size() == (r->verdict == Verdict::Offensive ? 3u : 0u));
            CHECK(r->classes.empty() == (r->verdict == Verdict::Clean));
            for (const auto& m : r->matches) CHECK(text.substr(m.span.start, m.span.length()) == m.surface);
            for (const auto& s : r->suggestions) CHECK(is_rule_clean(s.text, engine().rules()));
        }
    }
}

TEST_CASE("property: re-analysis of rule-only offences is clean") {
    // Inputs whose score stays below the offensive band owe their verdict to
    // rule matches (the classifier sees those through the rule-flag feature).
    const auto terms = generator_terms();
    Rng rng(5);
    int checked = 0;
    for (int i = 0; i < 600 && checked < 200; ++i) {
        auto text = synthetic::offensive_comment(rng, terms);
        auto r = analyze(text, engine());
        if (r.band == Band::OffensiveCandidate || r.matches.empty()) continue;
        ++checked;
        for (const auto& s : r.suggestions) {
            INFO(text, " -> ", s.text);
            CHECK(analyze(s.text, engine()).verdict == Verdict::Clean);
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("latency on 2 KB inputs") {
    const auto terms = generator_terms();
    Rng rng(3);
    std::string text;
    while (text.size() < 2000) text += synthetic::offensive_comment(rng, terms) + ". ";
    text.resize(2048);
    while (!is_valid_utf8(text)) text.pop_back();
    analyze(text, engine());
    auto t0 = std::chrono::steady_clock::now();
    constexpr int kRuns = 10;
    for (int i = 0; i < kRuns; ++i) analyze(text, engine());
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / kRuns;
    MESSAGE("mean analyze time for 2 KB: ", ms, " ms");
    CHECK(ms < 50.0);
}
