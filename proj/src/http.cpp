#include "crs/http.hpp"

#include "crs/error.hpp"

#include "httplib.h"

namespace crs {

HttpEndpoint parse_http_url(std::string_view url) {
    constexpr std::string_view kScheme = "http://";
    if (url.substr(0, kScheme.size()) != kScheme) {
        throw Error(ErrorCode::InvalidConfig, "only http:// endpoints are supported: " + std::string(url));
    }
    auto rest = url.substr(kScheme.size());
    auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    if (authority.empty()) throw Error(ErrorCode::InvalidConfig, "endpoint has no host: " + std::string(url));
    HttpEndpoint ep;
    ep.scheme_host_port = std::string(kScheme) + std::string(authority);
    ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    return ep;
}

HttpResult post_json(const HttpEndpoint& endpoint, const std::string& body, std::chrono::milliseconds timeout,
                     const std::vector<std::pair<std::string, std::string>>& headers) {
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    HttpResult out;
    auto res = client.Post(endpoint.path, hdrs, body, "application/json");
    if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.delivered = true;
    out.status = res->status;
    out.body = std::move(res->body);
    return out;
}

}  // namespace crs
