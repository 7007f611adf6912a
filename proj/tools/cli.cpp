#include "crs/cli.hpp"

#include "crs/corpus.hpp"
#include "crs/io.hpp"
#include "crs/ml.hpp"
#include "crs/pipeline.hpp"
#include "crs/service.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

namespace crs::cli {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InputTooLarge:
        case ErrorCode::InvalidEncoding:
        case ErrorCode::ParseError:
        case ErrorCode::EmptyCorpus:
        case ErrorCode::EmptyInput:
        case ErrorCode::SizeMismatch:
        case ErrorCode::SingleClassDataset:
        case ErrorCode::ClassMissing:
        case ErrorCode::EmptyDataset:
        case ErrorCode::NoOffenceFound:
        case ErrorCode::UnreadableSource:
        case ErrorCode::UnknownFormat:
        case ErrorCode::InvalidFraction:
        case ErrorCode::InvalidCounts:
        case ErrorCode::EmptyExport:
        case ErrorCode::IdMismatch:
        case ErrorCode::DegenerateMarginals:
            return kExitData;
        default:
            return kExitEngine;
    }
}

namespace {

std::atomic<bool> g_stop{false};
std::atomic<bool> g_reload{false};

extern "C" void on_stop_signal(int) { g_stop.store(true); }
extern "C" void on_reload_signal(int) { g_reload.store(true); }

/// Where engine artifacts come from: a service config file, or a data
/// directory with the standard layout. Environment overrides apply to both.
struct EngineSource {
    std::string config_path;
    std::string data_dir = CRS_DEFAULT_DATA_DIR;
    std::string mode;

    ServiceConfig service_config() const {
        ServiceConfig cfg;
        if (!config_path.empty()) {
            cfg = load_service_config(config_path);
        } else {
            cfg.paths = EnginePaths::defaults(data_dir);
        }
        apply_env_overrides(cfg, [](const char* name) { return std::getenv(name); });
        if (!mode.empty()) cfg.mode = parse_mode(mode);
        return cfg;
    }

    // Artifact problems are engine errors (exit 3) whatever their code.
    std::shared_ptr<const EngineContext> load() const {
        try {
            auto cfg = service_config();
            return EngineContext::load(cfg.paths, cfg.engine_options());
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("cannot load engine: ") + e.what());
        }
    }
};

void add_engine_options(CLI::App* cmd, EngineSource& src) {
    cmd->add_option("--config", src.config_path, "Service config JSON naming the artifacts");
    cmd->add_option("--data-dir", src.data_dir, "Directory with the standard artifact layout");
}

void add_mode_option(CLI::App* cmd, EngineSource& src) {
    cmd->add_option("--mode", src.mode, "Detection policy")->check(CLI::IsMember({"strict", "sensitive"}));
}

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::UnreadableSource, "cannot write " + path);
    f << content;
    if (!f) throw Error(ErrorCode::UnreadableSource, "failed writing " + path);
}

void print_marked(std::ostream& out, std::string_view text, const AnalysisReport& r) {
    out << render_highlights(text, r.matches, Marker::Brackets) << '\n';
    out << "verdict: " << to_string(r.verdict);
    if (!r.classes.empty()) out << " (" << r.classes.join(", ") << ")";
    out << std::fixed << std::setprecision(2) << "; score " << r.score.value << ", band " << to_string(r.band)
        << '\n';
    out.unsetf(std::ios::floatfield);
    if (r.suggestions.empty()) return;
    out << "suggestions:\n";
    for (std::size_t i = 0; i < r.suggestions.size(); ++i) {
        const auto& s = r.suggestions[i];
        out << "  " << i + 1 << ". [" << to_string(s.strategy);
        if (s.fallback) out << ", rewriter offline";
        if (s.duplicate) out << ", duplicate";
        out << "] " << s.text << '\n';
    }
}

nlohmann::ordered_json metrics_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

nlohmann::ordered_json report_json(const EvalReport& r) {
    return {{"accuracy", r.accuracy},
            {"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"tn", r.tn},
            {"positive", metrics_json(r.positive)},
            {"negative", metrics_json(r.negative)}};
}

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Offensive-language detection and conflict reduction for developer communities", "crs"};
    app.require_subcommand(1);

    EngineSource src;

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one comment");
    std::string text;
    bool use_stdin = false, as_json = false, marked = false, timing = false;
    auto* text_opt = analyze_cmd->add_option("--text", text, "Comment text");
    auto* stdin_opt = analyze_cmd->add_flag("--stdin", use_stdin, "Read the comment from standard input");
    text_opt->excludes(stdin_opt);
    auto* json_opt = analyze_cmd->add_flag("--json", as_json, "Print the report as JSON (default)");
    analyze_cmd->add_flag("--marked", marked, "Print highlighted text and suggestions")->excludes(json_opt);
    analyze_cmd->add_flag("--timing", timing, "Include per-phase timings in JSON output");
    add_mode_option(analyze_cmd, src);
    add_engine_options(analyze_cmd, src);

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Scan a corpus and report prevalence");
    std::string input, format = "jsonl", out_stats, out_offensive, from, to;
    std::optional<double> fraction;
    std::uint64_t seed = 42;
    scan_cmd->add_option("--input", input, "Corpus file")->required();
    scan_cmd->add_option("--format", format, "Corpus format")->check(CLI::IsMember({"jsonl", "csv"}));
    scan_cmd->add_option("--fraction", fraction, "Keep each record with this probability");
    scan_cmd->add_option("--seed", seed, "Sampling seed");
    scan_cmd->add_option("--from", from, "Earliest created_at (inclusive)");
    scan_cmd->add_option("--to", to, "Latest created_at (inclusive)");
    scan_cmd->add_option("--out-stats", out_stats, "Write stats JSON here");
    scan_cmd->add_option("--out-offensive", out_offensive, "Write the offensive export (JSONL) here");
    add_mode_option(scan_cmd, src);
    add_engine_options(scan_cmd, src);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a classifier from offensive and clean texts");
    std::string offensive_path, clean_path, model_out, loss = "hinge";
    std::string thesaurus_path, stopwords_path;
    bool multilabel = false;
    TrainConfig tcfg;
    std::size_t min_df = 2;
    train_cmd->add_option("--offensive", offensive_path, "Offensive texts (JSONL)")->required();
    train_cmd->add_option("--clean", clean_path, "Clean texts (JSONL)")->required();
    train_cmd->add_option("--out", model_out, "Model file to write")->required();
    train_cmd->add_flag("--multilabel", multilabel, "Train the Personal/Racial/Swearing model");
    train_cmd->add_option("--seed", tcfg.seed, "Seed for augmentation and training");
    train_cmd->add_option("--epochs", tcfg.epochs, "Passes over the data");
    train_cmd->add_option("--lr", tcfg.learning_rate, "Initial learning rate");
    train_cmd->add_option("--l2", tcfg.l2, "L2 strength");
    train_cmd->add_option("--loss", loss, "Loss")->check(CLI::IsMember({"hinge", "logistic"}));
    train_cmd->add_option("--min-df", min_df, "Minimum document frequency");
    train_cmd->add_option("--thesaurus", thesaurus_path, "Augmentation synonyms (TSV)");
    train_cmd->add_option("--stopwords", stopwords_path, "Words never replaced by augmentation");
    add_engine_options(train_cmd, src);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on labelled JSONL");
    std::string model_path, data_path;
    eval_cmd->add_option("--model", model_path, "Model file")->required();
    eval_cmd->add_option("--data", data_path, "Labelled JSONL")->required();
    add_engine_options(eval_cmd, src);

    // augment
    auto* augment_cmd = app.add_subcommand("augment", "Write synonym-augmented copies of texts");
    std::string augment_in;
    std::size_t k = 2;
    std::uint64_t augment_seed = 42;
    augment_cmd->add_option("--in", augment_in, "Texts (JSONL)")->required();
    augment_cmd->add_option("--k", k, "Words replaced per text");
    augment_cmd->add_option("--seed", augment_seed, "Seed");
    augment_cmd->add_option("--thesaurus", thesaurus_path, "Augmentation synonyms (TSV)");
    augment_cmd->add_option("--stopwords", stopwords_path, "Words never replaced");
    augment_cmd->add_option("--data-dir", src.data_dir, "Directory with the standard artifact layout");

    // kappa
    auto* kappa_cmd = app.add_subcommand("kappa", "Cohen's kappa between two annotation files");
    std::string kappa_a, kappa_b, kappa_class;
    bool label_set = false;
    kappa_cmd->add_option("--a", kappa_a, "First annotator (JSONL)")->required();
    kappa_cmd->add_option("--b", kappa_b, "Second annotator (JSONL)")->required();
    auto* class_opt = kappa_cmd->add_option("--class", kappa_class, "Agreement on one label");
    kappa_cmd->add_flag("--label-set", label_set, "Agreement on the exact label set")->excludes(class_opt);

    // paraphrase
    auto* para_cmd = app.add_subcommand("paraphrase", "Three non-offensive rewrites of a comment");
    std::string para_text;
    para_cmd->add_option("--text", para_text, "Comment text")->required();
    add_mode_option(para_cmd, src);
    add_engine_options(para_cmd, src);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    std::string addr;
    serve_cmd->add_option("--config", src.config_path, "Service config JSON");
    serve_cmd->add_option("--addr", addr, "host:port, overriding the config");
    serve_cmd->add_option("--data-dir", src.data_dir, "Directory with the standard artifact layout");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        // help for the subcommand that asked, not the whole app
        const CLI::App* asking = &app;
        for (const auto* sub : app.get_subcommands()) asking = sub;
        out << asking->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    auto resource_path = [&](const std::string& given, const std::string& relative) {
        return given.empty() ? src.data_dir + "/" + relative : given;
    };

    if (*analyze_cmd) {
        if (!text_opt->count() && !use_stdin) {
            err << "error: analyze needs --text or --stdin\n";
            return kExitUsage;
        }
        if (use_stdin) text = read_all(in);
        auto engine = src.load();
        auto report = analyze(text, *engine);
        if (marked) {
            print_marked(out, text, report);
        } else {
            out << to_json(report, timing).dump() << '\n';
        }
        return kExitOk;
    }

    if (*scan_cmd) {
        auto engine = src.load();
        ScanOptions opts;
        opts.fraction = fraction;
        opts.seed = seed;
        if (!from.empty()) opts.range.from = from;
        if (!to.empty()) opts.range.to = to;
        auto stream = open_input(input);
        RecordReader reader(stream, parse_format(format));
        auto result = scan_corpus(reader, *engine, opts);
        if (!out_stats.empty()) write_file(out_stats, to_json(result).dump(2) + "\n");
        if (!out_offensive.empty()) {
            std::ostringstream exported;
            for (const auto& r : result.exported) exported << to_json(r).dump() << '\n';
            write_file(out_offensive, exported.str());
        }
        out << stats_table(result);
        if (result.skipped) out << "skipped records: " << result.skipped << '\n';
        return kExitOk;
    }

    if (*train_cmd) {
        auto cfg = src.service_config();
        auto rules = load_ruleset_file(cfg.paths.ruleset);
        auto valence = ValenceLexicon::load_dir(cfg.paths.valence_dir);
        auto thesaurus = Thesaurus::load_file(resource_path(thesaurus_path, "thesaurus/synonyms.tsv"));
        auto stopwords = WordList::load_file(resource_path(stopwords_path, "stopwords.txt"));
        TrainingRequest req;
        req.offensive = read_labelled_jsonl_file(offensive_path, 1);
        req.clean = read_labelled_jsonl_file(clean_path, 0);
        tcfg.loss = parse_loss(loss);
        req.config = tcfg;
        req.min_df = min_df;
        req.multilabel = multilabel;
        auto result = train_from_texts(req, {&thesaurus, &stopwords, &rules, &valence, {}});
        std::ostringstream model;
        if (multilabel) {
            save_model(result.vocab, result.multilabel, model);
        } else {
            save_model(result.vocab, result.binary, model);
        }
        write_file(model_out, model.str());
        out << result.total << " examples (" << result.offensive << " offensive / " << result.non_offensive
            << " non-offensive)\n";
        out << "vocabulary: " << result.vocab.size() << " terms\n";
        out << "final training loss: " << std::setprecision(6) << result.final_loss << '\n';
        return kExitOk;
    }

    if (*eval_cmd) {
        auto cfg = src.service_config();
        auto rules = load_ruleset_file(cfg.paths.ruleset);
        auto valence = ValenceLexicon::load_dir(cfg.paths.valence_dir);
        FeatureExtractor extractor{&rules, &valence, {}};
        auto texts = read_labelled_jsonl_file(data_path, 0);
        std::optional<BinaryArtifact> binary;
        try {
            binary = load_binary_model_file(model_path);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CorruptModel) throw;
        }
        nlohmann::ordered_json j;
        if (binary) {
            auto data = featurize(texts, binary->vocab, extractor);
            j = report_json(evaluate(binary->model, data));
        } else {
            auto ml = load_multilabel_model_file(model_path);
            auto data = featurize(texts, ml.vocab, extractor);
            auto reports = evaluate_multilabel(ml.model, data);
            for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
                j[std::string(to_string(kAllClasses[c]))] = report_json(reports[c]);
            }
        }
        out << j.dump(2) << '\n';
        return kExitOk;
    }

    if (*augment_cmd) {
        auto thesaurus = Thesaurus::load_file(resource_path(thesaurus_path, "thesaurus/synonyms.tsv"));
        auto stopwords = WordList::load_file(resource_path(stopwords_path, "stopwords.txt"));
        auto texts = read_labelled_jsonl_file(augment_in, 0);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            texts[i].text = augment(normalize(texts[i].text), thesaurus, stopwords, k, derive_seed(augment_seed, i));
        }
        write_labelled_jsonl(out, texts);
        return kExitOk;
    }

    if (*kappa_cmd) {
        auto a = AnnotationFile::load_file(kappa_a);
        auto b = AnnotationFile::load_file(kappa_b);
        auto projection = label_set              ? KappaProjection::label_set()
                          : !kappa_class.empty() ? KappaProjection::of_class(kappa_class)
                                                 : KappaProjection::offensive();
        auto r = cohen_kappa(a, b, projection);
        nlohmann::ordered_json j = {{"kappa", r.kappa},
                                    {"observed_agreement", r.observed_agreement},
                                    {"expected_agreement", r.expected_agreement},
                                    {"items", a.labels.size()}};
        out << j.dump() << '\n';
        return kExitOk;
    }

    if (*para_cmd) {
        auto engine = src.load();
        auto report = analyze(para_text, *engine);
        if (report.verdict == Verdict::Clean) throw Error(ErrorCode::NoOffenceFound, "the text is not offensive");
        auto suggestions = nlohmann::ordered_json::array();
        for (const auto& s : report.suggestions) suggestions.push_back(to_json(s));
        out << nlohmann::ordered_json{{"suggestions", std::move(suggestions)}}.dump() << '\n';
        return kExitOk;
    }

    if (*serve_cmd) {
        auto cfg = src.service_config();
        if (!addr.empty()) {
            ServiceConfig with_addr = cfg;
            apply_env_overrides(with_addr, [&](const char* name) {
                return std::string_view(name) == "CRS_ADDR" ? addr.c_str() : nullptr;
            });
            cfg = with_addr;
        }
        g_stop = false;
        g_reload = false;
        std::signal(SIGINT, on_stop_signal);
        std::signal(SIGTERM, on_stop_signal);
        std::signal(SIGHUP, on_reload_signal);
        run_service(cfg, g_stop, g_reload, err);
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, in, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitEngine;
    }
}

}  // namespace crs::cli
