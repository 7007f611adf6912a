#pragma once

#include "crs/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace crs {

inline constexpr int kDefaultPort = 8080;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = kDefaultPort;  ///< 0 picks a free port
    EnginePaths paths = EnginePaths::defaults();
    Mode mode = Mode::Sensitive;
    double offensive_threshold = 0.7;
    double clean_threshold = 0.05;
    std::optional<std::string> remote_scorer_url;
    std::string remote_scorer_key;
    std::string remote_scorer_key_header = "x-api-key";
    std::chrono::milliseconds remote_timeout{2000};
    std::optional<std::string> rewriter_url;
    std::chrono::milliseconds rewriter_timeout{2000};
    std::size_t max_body_bytes = kMaxBodyBytes;
    std::chrono::milliseconds request_timeout{5000};
    std::string cors_origin = "*";

    /// Throws Error(InvalidConfig) for limits out of range and
    /// Error(UnreadableSource) for artifact paths that do not exist.
    void validate() const;
    EngineOptions engine_options() const;
};

/// Reads the JSON config (unknown keys rejected, relative paths resolved
/// against the file's directory). Throws Error(InvalidConfig) or ParseError.
ServiceConfig parse_service_config(const std::string& json_text, const std::string& base_dir);
ServiceConfig load_service_config(const std::string& path);

/// Applies CRS_ADDR, CRS_MODE, CRS_RULESET, CRS_MODEL, CRS_MULTILABEL_MODEL,
/// CRS_TOX_LEXICON, CRS_VALENCE_LEXICON, CRS_THESAURUS, CRS_REMOTE_SCORER_URL,
/// CRS_REMOTE_SCORER_KEY and CRS_REWRITER_URL from `getenv`.
void apply_env_overrides(ServiceConfig& cfg, const std::function<const char*(const char*)>& getenv);

/// A response as the handlers compute it, independent of the HTTP library.
struct HttpReply {
    int status = 200;
    std::string body;
};

/// Routes and engine snapshot. Handlers only read the snapshot, so a reload
/// never affects a request already in flight.
class Service {
public:
    /// Loads the engine immediately; throws if any artifact is unusable.
    explicit Service(ServiceConfig cfg);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    HttpReply health() const;
    HttpReply analyze(const std::string& request_body) const;
    HttpReply paraphrase(const std::string& request_body) const;
    HttpReply batch(const std::string& request_body, const std::string& mode_param) const;

    /// Rebuilds the engine from the configured paths and swaps it in. On
    /// failure the old engine stays and the error text is returned.
    std::optional<std::string> reload();

    /// Binds to cfg.host:cfg.port and returns the bound port.
    int bind();
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

    const ServiceConfig& config() const noexcept { return cfg_; }
    std::shared_ptr<const EngineContext> engine() const { return engine_.get(); }

private:
    void install_routes();

    ServiceConfig cfg_;
    EngineHandle engine_;
    std::unique_ptr<httplib::Server> server_;
};

/// Blocks serving `cfg` until `stop` becomes true. A true `reload` flag is
/// consumed by reloading the engine. Startup failures propagate as exceptions.
void run_service(const ServiceConfig& cfg, std::atomic<bool>& stop, std::atomic<bool>& reload,
                std::ostream& log);

}  // namespace crs
