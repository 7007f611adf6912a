#include "crs/synthetic.hpp"

#include "crs/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <array>
#include <set>

namespace crs::synthetic {

namespace {

constexpr std::string_view kVowels = "aeou";

std::string join_words(Rng& rng, const std::vector<std::string>& pool, std::size_t lo, std::size_t hi) {
    std::string out;
    auto n = lo + rng.index(hi - lo + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += pool[rng.index(pool.size())];
    }
    return out;
}

constexpr std::array<std::string_view, 24> kCleanSentences = {
    "thanks, that fixed it",
    "the build passes on my machine but fails in CI",
    "could you add a unit test for the parser change?",
    "I rebased onto main and the conflict is gone",
    "this PR looks good to me, merging after the checks pass",
    "the docs for the config flag are out of date",
    "which version of the compiler are you using?",
    "please attach the full stack trace",
    "we should cache the lookup instead of recomputing it",
    "the benchmark shows a 12% regression after this commit",
    "I can reproduce it on Linux but not on macOS",
    "the migration script needs a rollback step",
    "nice catch, I missed that edge case",
    "let's move this discussion to the issue tracker",
    "the release notes should mention the breaking change",
    "does anyone know why the linter complains here?",
    "I pushed a fix for the flaky test",
    "we could split this function into two smaller ones",
    "the API returns a 404 when the token expires",
    "the README example uses an old import path",
    "memory usage grows with every request",
    "please squash the commits before merging",
    "I am not sure this handles unicode input",
    "the timeout should be configurable",
};

constexpr std::array<std::string_view, 16> kOffensiveTemplates = {
    "you {} broke the build again",
    "only a {} would write code like this",
    "what a {} review, {} indeed",
    "{} like you should not touch the parser",
    "stop acting like a {} and read the docs",
    "this patch was written by a {}",
    "the maintainers are {}",
    "seriously {}, the tests are red",
    "I am done arguing with a {}",
    "{} ... the CI is failing because of you",
    "typical {} behaviour in this thread",
    "hey {}, read the contributing guide",
    "no {} would ship this, yet here we are",
    "close this issue, {}",
    "the {} who wrote this never ran it",
    "go away {}, nobody asked",
};

std::string fill_template(std::string_view tmpl, Rng& rng, const std::vector<std::string>& terms) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto hole = tmpl.find("{}", pos);
        out.append(tmpl.substr(pos, hole == std::string_view::npos ? std::string_view::npos : hole - pos));
        if (hole == std::string_view::npos) break;
        out += terms[rng.index(terms.size())];
        pos = hole + 2;
    }
    return out;
}

}  // namespace

std::vector<std::string> offensive_terms(const RuleSet& rules, const ToxicityLexicon& lexicon, double min_weight) {
    std::vector<std::string> out;
    for (const auto& [term, weight] : lexicon.entries()) {
        if (weight >= min_weight && rules.matches_any(normalize(term))) out.push_back(term);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string clean_comment(Rng& rng) { return std::string(kCleanSentences[rng.index(kCleanSentences.size())]); }

std::string offensive_comment(Rng& rng, const std::vector<std::string>& terms) {
    return fill_template(kOffensiveTemplates[rng.index(kOffensiveTemplates.size())], rng, terms);
}

std::vector<CommentRecord> comment_corpus(std::size_t total, std::size_t offensive, std::uint64_t seed,
                                          const std::vector<std::string>& terms) {
    static constexpr std::array<std::string_view, 4> kPlatforms = {"github", "gitter", "slack", "stackoverflow"};
    if (offensive > total) throw Error(ErrorCode::InvalidCounts, "more offensive records than records");
    if (offensive > 0 && terms.empty()) throw Error(ErrorCode::EmptyInput, "no offensive terms to embed");
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<bool> is_offensive(total, false);
    for (std::size_t i = 0; i < offensive; ++i) is_offensive[order[i]] = true;

    std::vector<CommentRecord> out;
    out.reserve(total);
    char id[32];
    char date[32];
    for (std::size_t i = 0; i < total; ++i) {
        std::snprintf(id, sizeof id, "c%07zu", i);
        std::snprintf(date, sizeof date, "20%02zu-11-%02zuT12:00:00Z", 15 + i % 6, 1 + i % 30);
        auto body = is_offensive[i] ? offensive_comment(rng, terms) : clean_comment(rng);
        out.push_back({std::string(kPlatforms[i % kPlatforms.size()]), id, date, std::move(body)});
    }
    return out;
}

std::vector<std::string> word_pool(std::string_view consonants, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < count) {
        std::string w;
        auto syllables = 2 + rng.index(2);
        for (std::uint64_t s = 0; s < syllables; ++s) {
            w += consonants[rng.index(consonants.size())];
            w += kVowels[rng.index(kVowels.size())];
        }
        if (seen.insert(w).second) out.push_back(w);
    }
    return out;
}

std::vector<LabelledText> separable_dataset(std::size_t per_class, std::uint64_t seed) {
    auto pos_pool = word_pool("bdgm", 50, derive_seed(seed, 0));
    auto neg_pool = word_pool("lpvz", 50, derive_seed(seed, 1));
    Rng rng(derive_seed(seed, 2));
    std::vector<LabelledText> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        out.push_back({join_words(rng, pos_pool, 5, 12), 1, {}});
        out.push_back({join_words(rng, neg_pool, 5, 12), 0, {}});
    }
    return out;
}

std::vector<LabelledText> disjoint_multilabel_dataset(std::size_t n, std::uint64_t seed) {
    const std::array<std::vector<std::string>, 3> pools = {word_pool("bd", 20, derive_seed(seed, 0)),
                                                           word_pool("gm", 20, derive_seed(seed, 1)),
                                                           word_pool("lp", 20, derive_seed(seed, 2))};
    auto filler = word_pool("vz", 20, derive_seed(seed, 3));
    Rng rng(derive_seed(seed, 4));
    std::vector<LabelledText> out;
    for (std::size_t i = 0; i < n; ++i) {
        ClassSet classes;
        while (classes.empty()) {
            for (auto c : kAllClasses) {
                if (rng.index(2)) classes.insert(c);
            }
        }
        std::string text = join_words(rng, filler, 1, 3);
        for (auto c : classes.members()) text += ' ' + join_words(rng, pools[static_cast<std::size_t>(c)], 2, 4);
        out.push_back({std::move(text), 1, classes});
    }
    return out;
}

}  // namespace crs::synthetic
