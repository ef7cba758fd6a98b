#pragma once
// Minimal JSON-over-HTTP client for the remote encoder and span backends.

#include <chrono>
#include <string>
#include <string_view>

#include "httplib.h"
#include "json.hpp"

// <resolv.h>, pulled in by httplib, defines _res, which collides with
// parameter names in Eigen.
#ifdef _res
#undef _res
#endif

#include "scholink/error.hpp"

namespace scholink::http {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // always starts with '/'
};

inline Endpoint parse_endpoint(std::string_view url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string_view::npos || scheme == 0)
        throw ConfigError("endpoint '" + std::string(url) + "' is not an absolute URL");
    std::string_view rest = url.substr(scheme + 3);
    if (rest.empty() || rest.front() == '/')
        throw ConfigError("endpoint '" + std::string(url) + "' has no host");
    std::size_t slash = rest.find('/');
    Endpoint ep;
    ep.base = std::string(url.substr(0, scheme + 3 + (slash == std::string_view::npos ? rest.size() : slash)));
    ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    return ep;
}

inline bool is_absolute_url(std::string_view url) {
    try {
        parse_endpoint(url);
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

// POSTs `body` and returns the parsed JSON reply. Anything short of a 200
// with a JSON body is RemoteUnavailable.
inline nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                                std::chrono::milliseconds timeout) {
    const Endpoint ep = parse_endpoint(url);
    httplib::Client client(ep.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(ep.path, body.dump(), "application/json");
    if (!res) throw RemoteUnavailable(url, httplib::to_string(res.error()));
    if (res->status != 200)
        throw RemoteUnavailable(url, "HTTP status " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw RemoteUnavailable(url, std::string("invalid JSON reply: ") + e.what());
    }
}

}  // namespace scholink::http
