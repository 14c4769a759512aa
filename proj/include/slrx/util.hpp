#pragma once

#include <openssl/evp.h>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <string_view>

#include "slrx/errors.hpp"

namespace slrx {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = kFnvOffsetBasis;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::internal, "sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// Makes an arbitrary identifier (provider or document id) usable as a single
// path component. Lossy replacements get a hash suffix to keep keys distinct.
inline std::string sanitize_path_component(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool changed = false;
    for (char c : name) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
        changed = changed || !ok;
    }
    if (out.empty() || changed) {
        out += "-";
        out += sha256_hex(name).substr(0, 8);
    }
    return out;
}

struct UrlParts {
    std::string origin;     // scheme://host[:port]
    std::string base_path;  // leading path, may be empty; no trailing slash
};

inline UrlParts split_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + std::string(url));
    }
    auto path_start = url.find('/', scheme_end + 3);
    UrlParts parts;
    if (path_start == std::string_view::npos) {
        parts.origin = std::string(url);
    } else {
        parts.origin = std::string(url.substr(0, path_start));
        std::string_view path = url.substr(path_start);
        while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
        if (path != "/") parts.base_path = std::string(path);
    }
    return parts;
}

}  // namespace slrx
