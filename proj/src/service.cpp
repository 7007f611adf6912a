#include "crs/service.hpp"

#include "crs/corpus.hpp"
#include "crs/error.hpp"
#include "crs/io.hpp"

#include "httplib.h"

#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

namespace crs {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- configuration

namespace {

void parse_addr(ServiceConfig& cfg, const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0) throw Error(ErrorCode::InvalidConfig, "address must be host:port");
    auto port_text = addr.substr(colon + 1);
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "bad port in address '" + addr + "'");
    cfg.host = addr.substr(0, colon);
    cfg.port = port;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::chrono::milliseconds positive_ms(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw Error(ErrorCode::InvalidConfig, key + " must be a positive integer");
    }
    return std::chrono::milliseconds(v.get<long long>());
}

std::string str(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, key + " must be a string");
    return v.get<std::string>();
}

void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + where);
        }
    }
}

}  // namespace

void ServiceConfig::validate() const {
    if (max_body_bytes == 0 || max_body_bytes > kMaxBodyBytes) {
        throw Error(ErrorCode::InvalidConfig, "max_body_bytes must be in [1, " + std::to_string(kMaxBodyBytes) + "]");
    }
    if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");
    if (request_timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "request timeout must be positive");
    engine_options().scorer.validate();
    for (const auto* p : {&paths.ruleset, &paths.toxicity_lexicon, &paths.valence_dir, &paths.binary_model,
                          &paths.multilabel_model, &paths.thesaurus}) {
        if (!fs::exists(*p)) throw Error(ErrorCode::UnreadableSource, "artifact not found: " + *p);
    }
}

EngineOptions ServiceConfig::engine_options() const {
    EngineOptions o;
    o.mode = mode;
    o.scorer.offensive_threshold = offensive_threshold;
    o.scorer.clean_threshold = clean_threshold;
    o.scorer.remote_endpoint = remote_scorer_url;
    o.scorer.remote_timeout = remote_timeout;
    if (!remote_scorer_key.empty()) {
        o.scorer.api_key_header = remote_scorer_key_header;
        o.scorer.api_key = remote_scorer_key;
    }
    o.rewriter_url = rewriter_url;
    o.rewriter_timeout = rewriter_timeout;
    return o;
}

ServiceConfig parse_service_config(const std::string& json_text, const std::string& base_dir) {
    auto j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    check_keys(j,
               {"addr", "mode", "ruleset", "model", "multilabel_model", "tox_lexicon", "valence_lexicon", "thesaurus",
                "offensive_threshold", "clean_threshold", "remote_scorer", "rewriter", "max_body_bytes",
                "request_timeout_ms", "cors_origin"},
               "service config");
    ServiceConfig cfg;
    for (const auto& [key, v] : j.items()) {
        if (key == "addr") parse_addr(cfg, str(v, key));
        else if (key == "mode") cfg.mode = parse_mode(str(v, key));
        else if (key == "ruleset") cfg.paths.ruleset = resolve(base_dir, str(v, key));
        else if (key == "model") cfg.paths.binary_model = resolve(base_dir, str(v, key));
        else if (key == "multilabel_model") cfg.paths.multilabel_model = resolve(base_dir, str(v, key));
        else if (key == "tox_lexicon") cfg.paths.toxicity_lexicon = resolve(base_dir, str(v, key));
        else if (key == "valence_lexicon") cfg.paths.valence_dir = resolve(base_dir, str(v, key));
        else if (key == "thesaurus") cfg.paths.thesaurus = resolve(base_dir, str(v, key));
        else if (key == "offensive_threshold" || key == "clean_threshold") {
            if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, key + " must be a number");
            (key == "offensive_threshold" ? cfg.offensive_threshold : cfg.clean_threshold) = v.get<double>();
        } else if (key == "remote_scorer") {
            if (!v.is_object()) throw Error(ErrorCode::InvalidConfig, "remote_scorer must be an object");
            check_keys(v, {"url", "key", "key_header", "timeout_ms"}, "remote_scorer");
            if (v.contains("url")) cfg.remote_scorer_url = str(v["url"], "remote_scorer.url");
            if (v.contains("key")) cfg.remote_scorer_key = str(v["key"], "remote_scorer.key");
            if (v.contains("key_header")) cfg.remote_scorer_key_header = str(v["key_header"], "remote_scorer.key_header");
            if (v.contains("timeout_ms")) cfg.remote_timeout = positive_ms(v["timeout_ms"], "remote_scorer.timeout_ms");
        } else if (key == "rewriter") {
            if (!v.is_object()) throw Error(ErrorCode::InvalidConfig, "rewriter must be an object");
            check_keys(v, {"url", "timeout_ms"}, "rewriter");
            if (v.contains("url")) cfg.rewriter_url = str(v["url"], "rewriter.url");
            if (v.contains("timeout_ms")) cfg.rewriter_timeout = positive_ms(v["timeout_ms"], "rewriter.timeout_ms");
        } else if (key == "max_body_bytes") {
            if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidConfig, "max_body_bytes must be a positive integer");
            cfg.max_body_bytes = v.get<std::size_t>();
        } else if (key == "request_timeout_ms") {
            cfg.request_timeout = positive_ms(v, key);
        } else if (key == "cors_origin") {
            cfg.cors_origin = str(v, key);
        }
    }
    return cfg;
}

ServiceConfig load_service_config(const std::string& path) {
    auto text = read_file(path);
    return parse_service_config(text, fs::path(path).parent_path().string());
}

void apply_env_overrides(ServiceConfig& cfg, const std::function<const char*(const char*)>& getenv) {
    auto get = [&](const char* name) -> std::optional<std::string> {
        const char* v = getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = get("CRS_ADDR")) parse_addr(cfg, *v);
    if (auto v = get("CRS_MODE")) cfg.mode = parse_mode(*v);
    if (auto v = get("CRS_RULESET")) cfg.paths.ruleset = *v;
    if (auto v = get("CRS_MODEL")) cfg.paths.binary_model = *v;
    if (auto v = get("CRS_MULTILABEL_MODEL")) cfg.paths.multilabel_model = *v;
    if (auto v = get("CRS_TOX_LEXICON")) cfg.paths.toxicity_lexicon = *v;
    if (auto v = get("CRS_VALENCE_LEXICON")) cfg.paths.valence_dir = *v;
    if (auto v = get("CRS_THESAURUS")) cfg.paths.thesaurus = *v;
    if (auto v = get("CRS_REMOTE_SCORER_URL")) cfg.remote_scorer_url = *v;
    if (auto v = get("CRS_REMOTE_SCORER_KEY")) cfg.remote_scorer_key = *v;
    if (auto v = get("CRS_REWRITER_URL")) cfg.rewriter_url = *v;
}

// ---------------------------------------------------------------- handlers

namespace {

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
    nlohmann::ordered_json j = {{"error", code}, {"message", message}};
    return {status, j.dump()};
}

HttpReply error_reply(int status, const Error& e) { return error_reply(status, to_string(e.code()), e.what()); }

/// Parses {"text": str, "mode"?: str}; fills `reply` and returns false on failure.
bool parse_text_request(const std::string& body, std::size_t max_bytes, std::string& text, std::optional<Mode>& mode,
                        HttpReply& reply) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        reply = error_reply(400, "ParseError", "request body must be a JSON object");
        return false;
    }
    if (!j.contains("text") || !j["text"].is_string()) {
        reply = error_reply(400, "ParseError", "\"text\" must be a string");
        return false;
    }
    text = j["text"].get<std::string>();
    if (text.size() > max_bytes) {
        reply = error_reply(413, "InputTooLarge",
                            "text has " + std::to_string(text.size()) + " bytes, limit " + std::to_string(max_bytes));
        return false;
    }
    if (j.contains("mode")) {
        try {
            if (!j["mode"].is_string()) throw Error(ErrorCode::InvalidConfig, "\"mode\" must be a string");
            mode = parse_mode(j["mode"].get<std::string>());
        } catch (const Error& e) {
            reply = error_reply(422, e);
            return false;
        }
    }
    return true;
}

int status_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InputTooLarge: return 413;
        case ErrorCode::InvalidEncoding: return 400;
        case ErrorCode::NoOffenceFound: return 409;
        case ErrorCode::EngineNotReady: return 503;
        default: return 500;
    }
}

}  // namespace

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    engine_.replace(EngineContext::load(cfg_.paths, cfg_.engine_options()));
}

Service::~Service() { stop(); }

HttpReply Service::health() const {
    auto engine = engine_.get();
    if (!engine) return error_reply(503, "EngineNotReady", "no engine loaded");
    nlohmann::ordered_json versions = nlohmann::ordered_json::object();
    for (const auto& [k, v] : engine->versions()) versions[k] = v;
    nlohmann::ordered_json j = {{"status", "ok"}, {"versions", std::move(versions)}};
    return {200, j.dump()};
}

HttpReply Service::analyze(const std::string& request_body) const {
    HttpReply reply;
    std::string text;
    std::optional<Mode> mode;
    if (!parse_text_request(request_body, cfg_.max_body_bytes, text, mode, reply)) return reply;
    auto engine = engine_.get();
    if (!engine) return error_reply(503, "EngineNotReady", "no engine loaded");
    try {
        auto report = crs::analyze(text, *engine, AnalyzeOptions{mode, true});
        return {200, to_json(report).dump()};
    } catch (const Error& e) {
        return error_reply(status_for(e), e);
    }
}

HttpReply Service::paraphrase(const std::string& request_body) const {
    HttpReply reply;
    std::string text;
    std::optional<Mode> mode;
    if (!parse_text_request(request_body, cfg_.max_body_bytes, text, mode, reply)) return reply;
    auto engine = engine_.get();
    if (!engine) return error_reply(503, "EngineNotReady", "no engine loaded");
    try {
        auto report = crs::analyze(text, *engine, AnalyzeOptions{mode, true});
        if (report.verdict == Verdict::Clean) return error_reply(409, "NoOffenceFound", "the text is not offensive");
        auto suggestions = nlohmann::ordered_json::array();
        for (const auto& s : report.suggestions) suggestions.push_back(to_json(s));
        nlohmann::ordered_json j = {{"suggestions", std::move(suggestions)}};
        return {200, j.dump()};
    } catch (const Error& e) {
        return error_reply(status_for(e), e);
    }
}

HttpReply Service::batch(const std::string& request_body, const std::string& mode_param) const {
    // Records are framed by newlines, so only bytes that break line splitting
    // are fatal; bad records are counted instead.
    if (!is_valid_utf8(request_body)) return error_reply(400, "InvalidEncoding", "batch body is not valid UTF-8");
    if (request_body.find('\0') != std::string::npos) return error_reply(400, "ParseError", "NUL byte in batch body");
    ScanOptions opts;
    if (!mode_param.empty()) {
        try {
            opts.mode = parse_mode(mode_param);
        } catch (const Error& e) {
            return error_reply(422, e);
        }
    }
    auto engine = engine_.get();
    if (!engine) return error_reply(503, "EngineNotReady", "no engine loaded");
    std::istringstream in(request_body);
    RecordReader reader(in, Format::Jsonl);
    auto result = scan_corpus(reader, *engine, opts);
    return {200, to_json(result).dump()};
}

std::optional<std::string> Service::reload() {
    try {
        engine_.replace(EngineContext::load(cfg_.paths, cfg_.engine_options()));
        return std::nullopt;
    } catch (const std::exception& e) {
        return std::string(e.what());
    }
}

void Service::install_routes() {
    auto& s = *server_;
    s.set_payload_max_length(cfg_.max_body_bytes * 4 + 4096);
    s.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.request_timeout).count(),
                       (cfg_.request_timeout.count() % 1000) * 1000);
    s.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.request_timeout).count(),
                        (cfg_.request_timeout.count() % 1000) * 1000);
    s.set_default_headers({{"Access-Control-Allow-Origin", cfg_.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    s.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    s.Post("/v1/analyze",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, analyze(req.body)); });
    s.Post("/v1/paraphrase",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, paraphrase(req.body)); });
    s.Post("/v1/batch", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, batch(req.body, req.has_param("mode") ? req.get_param_value("mode") : std::string()));
    });
    s.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        std::string code = res.status == 413 ? "InputTooLarge" : res.status == 404 ? "NotFound" : "HttpError";
        nlohmann::ordered_json j = {{"error", code}, {"message", "status " + std::to_string(res.status)}};
        res.set_content(j.dump(), "application/json");
    });
}

int Service::bind() {
    if (!server_) {
        server_ = std::make_unique<httplib::Server>();
        install_routes();
    }
    int port = cfg_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(cfg_.host);
    } else if (!server_->bind_to_port(cfg_.host, port)) {
        port = -1;
    }
    if (port < 0) throw Error(ErrorCode::InvalidConfig, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    return port;
}

void Service::listen() {
    if (!server_) throw Error(ErrorCode::EngineNotReady, "bind() before listen()");
    server_->listen_after_bind();
}

void Service::stop() {
    if (server_) server_->stop();
}

void run_service(const ServiceConfig& cfg, std::atomic<bool>& stop, std::atomic<bool>& reload, std::ostream& log) {
    Service service(cfg);
    const int port = service.bind();
    log << "listening on " << cfg.host << ':' << port << std::endl;
    std::thread server([&] { service.listen(); });
    while (!stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        if (reload.exchange(false)) {
            if (auto err = service.reload()) {
                log << "reload failed, keeping the previous engine: " << *err << std::endl;
            } else {
                log << "engine reloaded" << std::endl;
            }
        }
    }
    service.stop();
    server.join();
}

}  // namespace crs
