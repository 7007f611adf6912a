#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crs {

struct HttpEndpoint {
    std::string scheme_host_port;  ///< e.g. http://localhost:8080
    std::string path;
};

/// Splits an http URL; throws Error(InvalidConfig) for other schemes.
HttpEndpoint parse_http_url(std::string_view url);

struct HttpResult {
    bool delivered = false;  ///< false on connect/read failure or timeout
    int status = 0;
    std::string body;
    std::string error;
};

/// Blocking JSON POST with one timeout applied to connect, read and write.
HttpResult post_json(const HttpEndpoint& endpoint, const std::string& body, std::chrono::milliseconds timeout,
                     const std::vector<std::pair<std::string, std::string>>& headers = {});

}  // namespace crs
