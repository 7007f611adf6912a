#include "doctest.h"

#include "crs/cli.hpp"
#include "crs/io.hpp"
#include "crs/pipeline.hpp"
#include "json.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace crs;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
    args.insert(args.begin(), "crs");
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, in, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

/// Scratch directory removed on destruction.
struct TempDir {
    fs::path root;
    TempDir() {
        root = fs::temp_directory_path() /
               ("crs_cli_" + std::to_string(::getpid()) + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(root);
    }
    ~TempDir() { fs::remove_all(root); }
    std::string write(const std::string& name, const std::string& content) const {
        auto p = (root / name).string();
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("analyze") {
    auto o = run_cli({"analyze", "--text", "you idiot", "--marked"});
    CHECK(o.code == 0);
    CHECK(o.out.rfind("you ⟦idiot|Personal⟧\n", 0) == 0);
    CHECK(o.out.find("verdict: offensive (Personal)") != std::string::npos);
    CHECK(o.out.find("[rewrite, rewriter offline]") != std::string::npos);

    o = run_cli({"analyze", "--text", ""});
    CHECK(o.code == 0);
    CHECK(json::parse(o.out)["verdict"] == "clean");

    // JSON output is the module's own serialization
    auto engine = EngineContext::load(EnginePaths::defaults(), {});
    o = run_cli({"analyze", "--text", "you idiot"});
    CHECK(o.out == to_json(analyze("you idiot", *engine)).dump() + "\n");
    o = run_cli({"analyze", "--stdin"}, "you idiot");
    CHECK(o.out == to_json(analyze("you idiot", *engine)).dump() + "\n");

    o = run_cli({"analyze", "--text", "you are an idiot", "--mode", "strict"});
    CHECK(json::parse(o.out)["verdict"] == "clean");
    CHECK(json::parse(run_cli({"analyze", "--text", "x", "--timing"}).out).contains("timing_ms"));
}

TEST_CASE("usage and exit codes") {
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"analyze", "--text", "x", "--bogus"}).code == cli::kExitUsage);
    CHECK(run_cli({"analyze"}).code == cli::kExitUsage);
    CHECK(run_cli({"analyze", "--text", "x", "--mode", "loud"}).code == cli::kExitUsage);
    CHECK(run_cli({"analyze", "--text", "x", "--json", "--marked"}).code == cli::kExitUsage);
    auto help = run_cli({"scan", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--fraction") != std::string::npos);

    CHECK(run_cli({"analyze", "--text", "bad \xff"}).code == cli::kExitData);
    auto missing = run_cli({"analyze", "--text", "x", "--data-dir", "/nonexistent"});
    CHECK(missing.code == cli::kExitEngine);
    CHECK(missing.err.find("error:") == 0);

    CHECK(run_cli({"paraphrase", "--text", "thanks"}).code == cli::kExitData);
    auto p = run_cli({"paraphrase", "--text", "you idiot"});
    CHECK(p.code == 0);
    CHECK(json::parse(p.out)["suggestions"].size() == 3);

    CHECK(cli::exit_code_for(ErrorCode::InvalidFraction) == cli::kExitData);
    CHECK(cli::exit_code_for(ErrorCode::CorruptModel) == cli::kExitEngine);
    CHECK(cli::exit_code_for(ErrorCode::RemoteUnavailable) == cli::kExitEngine);
}

TEST_CASE("scan") {
    TempDir dir;
    auto input = dir.write("c.jsonl", R"({"platform":"github","id":"1","created_at":"2020-11-01","body":"you idiot"}
{"platform":"github","id":"2","created_at":"2020-11-02","body":"looks good"}
{"platform":"slack","id":"3","created_at":"2020-12-01","body":"thanks"}
broken
)");
    CHECK(run_cli({"scan", "--input", dir.path("none.jsonl")}).code == cli::kExitData);
    CHECK(run_cli({"scan", "--input", input, "--fraction", "0"}).code == cli::kExitData);
    CHECK(run_cli({"scan", "--input", input, "--format", "xml"}).code == cli::kExitUsage);

    auto o = run_cli({"scan", "--input", input, "--fraction", "1.0", "--out-stats", dir.path("s.json"),
                      "--out-offensive", dir.path("o.jsonl")});
    REQUIRE(o.code == 0);
    CHECK(o.out.find("all") != std::string::npos);
    CHECK(o.out.find("skipped records: 1") != std::string::npos);
    auto stats = json::parse(read_file(dir.path("s.json")));
    CHECK(stats["overall"]["total"] == 3);
    CHECK(stats["overall"]["offensive"] == 1);
    CHECK(stats["overall"]["rate"] == 33.33);
    auto exported = read_file(dir.path("o.jsonl"));
    CHECK(json::parse(exported)["id"] == "1");

    o = run_cli({"scan", "--input", input, "--from", "2020-11-01", "--to", "2020-11-30", "--out-stats",
                 dir.path("s2.json")});
    CHECK(json::parse(read_file(dir.path("s2.json")))["overall"]["total"] == 2);

    auto csv = dir.write("c.csv", "platform,id,created_at,body\ngithub,1,,\"you, idiot\"\n");
    o = run_cli({"scan", "--input", csv, "--format", "csv", "--out-stats", dir.path("s3.json")});
    CHECK(o.code == 0);
    CHECK(json::parse(read_file(dir.path("s3.json")))["overall"]["offensive"] == 1);
}

TEST_CASE("train, eval and augment") {
    TempDir dir;
    auto off = dir.write("off.jsonl", "{\"text\":\"you idiot\"}\n");
    auto clean = dir.write("clean.jsonl", "{\"text\":\"thanks for the fix\"}\n");
    auto o = run_cli({"train", "--offensive", off, "--clean", clean, "--out", dir.path("m.json"), "--min-df", "1"});
    REQUIRE(o.code == 0);
    CHECK(o.out.rfind("4 examples (1 offensive / 3 non-offensive)\n", 0) == 0);
    CHECK(o.out.find("final training loss:") != std::string::npos);

    auto labelled = dir.write("eval.jsonl", "{\"text\":\"you idiot\",\"label\":1}\n{\"text\":\"thanks for the fix\",\"label\":0}\n");
    o = run_cli({"eval", "--model", dir.path("m.json"), "--data", labelled});
    REQUIRE(o.code == 0);
    CHECK(json::parse(o.out)["accuracy"] == 1.0);

    o = run_cli({"eval", "--model", test::data_path("models/multilabel.json"), "--data", labelled});
    REQUIRE(o.code == 0);
    CHECK(json::parse(o.out).contains("Personal"));

    CHECK(run_cli({"eval", "--model", clean, "--data", labelled}).code == cli::kExitEngine);
    CHECK(run_cli({"train", "--offensive", off, "--clean", dir.write("e.jsonl", ""), "--out", dir.path("x")}).code ==
          cli::kExitData);

    auto a1 = run_cli({"augment", "--in", test::data_path("train/clean.jsonl"), "--k", "2", "--seed", "3"});
    auto a2 = run_cli({"augment", "--in", test::data_path("train/clean.jsonl"), "--k", "2", "--seed", "3"});
    REQUIRE(a1.code == 0);
    CHECK(a1.out == a2.out);
    CHECK(std::count(a1.out.begin(), a1.out.end(), '\n') == 400);
}

TEST_CASE("shipped models are reproducible from the training data") {
    TempDir dir;
    const auto off = test::data_path("train/offensive.jsonl"), clean = test::data_path("train/clean.jsonl");
    REQUIRE(run_cli({"train", "--offensive", off, "--clean", clean, "--out", dir.path("b.json"), "--seed", "42"}).code ==
            0);
    REQUIRE(run_cli({"train", "--offensive", off, "--clean", clean, "--out", dir.path("m.json"), "--seed", "42",
                     "--multilabel"})
                .code == 0);
    CHECK(read_file(dir.path("b.json")) == read_file(test::data_path("models/binary.json")));
    CHECK(read_file(dir.path("m.json")) == read_file(test::data_path("models/multilabel.json")));
}

TEST_CASE("kappa") {
    TempDir dir;
    auto a = dir.write("a.jsonl", "{\"id\":\"1\",\"labels\":[\"Personal\"]}\n{\"id\":\"2\",\"labels\":[]}\n");
    auto o = run_cli({"kappa", "--a", a, "--b", a});
    REQUIRE(o.code == 0);
    auto j = json::parse(o.out);
    CHECK(j["kappa"] == 1.0);
    CHECK(j["items"] == 2);

    auto b = dir.write("b.jsonl", "{\"id\":\"1\",\"labels\":[\"Personal\"]}\n{\"id\":\"3\",\"labels\":[]}\n");
    CHECK(run_cli({"kappa", "--a", a, "--b", b}).code == cli::kExitData);
    auto all_yes = dir.write("y.jsonl", "{\"id\":\"1\",\"labels\":[\"Racial\"]}\n");
    CHECK(run_cli({"kappa", "--a", all_yes, "--b", all_yes}).code == cli::kExitData);
    CHECK(run_cli({"kappa", "--a", a, "--b", a, "--class", "Personal"}).code == 0);
    CHECK(run_cli({"kappa", "--a", a, "--b", a, "--class", "Personal", "--label-set"}).code == cli::kExitUsage);
}
