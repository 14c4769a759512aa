#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "slrx/errors.hpp"
#include "slrx/http.hpp"

namespace slrx {

// Exponential backoff with full jitter: delay_i = U(0, 1) * base * factor^i.
// sleep and jitter are injectable so tests can record delays instead of waiting.
struct BackoffPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    std::function<void(std::chrono::milliseconds)> sleep =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    std::function<double()> jitter = [] {
        thread_local std::mt19937_64 rng{std::random_device{}()};
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    };

    std::chrono::milliseconds delay(int attempt) const {
        double ms = jitter() * static_cast<double>(base.count()) * std::pow(factor, attempt);
        return std::chrono::milliseconds(static_cast<long long>(ms));
    }
};

inline bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

// POSTs with retries on transport failures and HTTP 429/5xx. Other 4xx fail
// immediately with RequestError. Exhaustion raises TimeoutError when the last
// failure was a timeout, ProviderError otherwise.
inline HttpResponse post_with_retries(Transport& transport, const std::string& path,
                                      const std::string& body,
                                      const std::vector<HttpHeader>& headers,
                                      const BackoffPolicy& policy) {
    std::string last_failure;
    bool last_was_timeout = false;
    for (int attempt = 0;; ++attempt) {
        try {
            HttpResponse res = transport.post_json(path, body, headers);
            if (res.status >= 200 && res.status < 300) return res;
            if (!retryable_status(res.status)) {
                throw RequestError("HTTP " + std::to_string(res.status) + " from " + path + ": " +
                                   res.body.substr(0, 200));
            }
            last_failure = "HTTP " + std::to_string(res.status);
            last_was_timeout = false;
        } catch (const TransportFailure& e) {
            last_failure = e.what();
            last_was_timeout = e.timeout;
        }
        if (attempt >= policy.max_retries) break;
        policy.sleep(policy.delay(attempt));
    }
    std::string msg = "retries exhausted for " + path + " (last: " + last_failure + ")";
    if (last_was_timeout) throw TimeoutError(msg);
    throw ProviderError(msg);
}

}  // namespace slrx
