#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>

#include "slrx/util.hpp"

namespace slrx {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeader = std::pair<std::string, std::string>;

// Connection-level failure (no HTTP status available).
struct TransportFailure : std::runtime_error {
    explicit TransportFailure(const std::string& m, bool timed_out = false)
        : std::runtime_error(m), timeout(timed_out) {}
    bool timeout = false;
};

// One POST with a JSON body. Implementations must be callable from multiple
// threads at once.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                   const std::vector<HttpHeader>& headers) = 0;
};

// Real HTTP transport over cpp-httplib. A fresh client per request keeps the
// transport stateless and thread-safe.
class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(const std::string& endpoint,
                              std::chrono::seconds timeout = std::chrono::seconds{60})
        : parts_(split_url(endpoint)), timeout_(timeout) {}

    HttpResponse post_json(const std::string& path, const std::string& body,
                           const std::vector<HttpHeader>& headers) override {
        ++request_count();
        httplib::Client client(parts_.origin);
        client.set_connection_timeout(timeout_.count(), 0);
        client.set_read_timeout(timeout_.count(), 0);
        client.set_write_timeout(timeout_.count(), 0);
        httplib::Headers hs;
        for (const auto& [k, v] : headers) hs.emplace(k, v);
        auto res = client.Post(parts_.base_path + path, hs, body, "application/json");
        if (!res) {
            bool timed_out = res.error() == httplib::Error::ConnectionTimeout;
            throw TransportFailure(parts_.origin + path + ": " + httplib::to_string(res.error()),
                                   timed_out);
        }
        return {res->status, res->body};
    }

    // Process-wide count of HTTP requests actually issued; offline paths must
    // leave it untouched.
    static std::atomic<std::uint64_t>& request_count() {
        static std::atomic<std::uint64_t> count{0};
        return count;
    }

private:
    UrlParts parts_;
    std::chrono::seconds timeout_;
};

}  // namespace slrx
