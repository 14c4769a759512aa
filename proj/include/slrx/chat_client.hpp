#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slrx/backoff.hpp"
#include "slrx/errors.hpp"
#include "slrx/http.hpp"
#include "slrx/prompt.hpp"
#include "slrx/util.hpp"

namespace slrx {

struct LLMConfig {
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 256;
    std::chrono::seconds timeout{60};
    int max_retries = 3;
};

struct RawCompletion {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    long latency_ms = 0;
    bool from_cache = false;
};

// Content-addressed completion store. Key = SHA-256 over (model_id,
// system_text, user_text); file = {cache_dir}/completions/{key[0:2]}/{key}.json.
class CompletionCache {
public:
    explicit CompletionCache(std::filesystem::path cache_dir)
        : root_(std::move(cache_dir) / "completions") {}

    static std::string key(const std::string& model_id, const std::string& system_text,
                           const std::string& user_text) {
        std::string material;
        material.reserve(model_id.size() + system_text.size() + user_text.size() + 2);
        material += model_id;
        material += '\0';
        material += system_text;
        material += '\0';
        material += user_text;
        return sha256_hex(material);
    }

    std::optional<RawCompletion> get(const std::string& key) const {
        std::ifstream in(entry_path(key));
        if (!in) return std::nullopt;
        nlohmann::json j;
        try {
            in >> j;
            RawCompletion c;
            c.text = j.at("response_text").get<std::string>();
            c.prompt_tokens = j.value("prompt_tokens", 0L);
            c.completion_tokens = j.value("completion_tokens", 0L);
            c.from_cache = true;
            return c;
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;  // corrupt entry; treat as a miss
        }
    }

    void put(const std::string& key, const std::string& model_id, const RawCompletion& c) {
        std::lock_guard<std::mutex> lock(mu_);
        auto path = entry_path(key);
        std::filesystem::create_directories(path.parent_path());
        nlohmann::json j = {{"request_digest", key},
                            {"model_id", model_id},
                            {"response_text", c.text},
                            {"prompt_tokens", c.prompt_tokens},
                            {"completion_tokens", c.completion_tokens},
                            {"created_at", iso8601_utc_now()}};
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::internal, "cannot write cache file: " + tmp.string());
            out << j.dump(2) << '\n';
        }
        std::filesystem::rename(tmp, path);
    }

private:
    std::filesystem::path entry_path(const std::string& key) const {
        return root_ / key.substr(0, 2) / (key + ".json");
    }

    std::filesystem::path root_;
    std::mutex mu_;
};

// Chat-completions client: POST {endpoint}/chat/completions with system+user
// messages, first choice's message content as the completion. Consults the
// cache before any network activity; successful responses are stored back.
class ChatClient {
public:
    struct Counters {
        std::uint64_t cache_hits = 0;
        std::uint64_t cache_misses = 0;
    };

    ChatClient(Transport& transport, CompletionCache* cache, std::string api_key = "",
               BackoffPolicy policy = {})
        : transport_(transport), cache_(cache), api_key_(std::move(api_key)),
          policy_(std::move(policy)) {}

    RawCompletion complete(const LLMConfig& config, const PromptBundle& prompt) {
        if (config.model_id.empty()) throw ConfigError("model_id must be non-empty");
        const std::string key =
            CompletionCache::key(config.model_id, prompt.system_text, prompt.user_text);
        if (cache_) {
            if (auto hit = cache_->get(key)) {
                ++hits_;
                return *hit;
            }
        }
        ++misses_;

        nlohmann::json body = {
            {"model", config.model_id},
            {"temperature", config.temperature},
            {"max_tokens", config.max_output_tokens},
            {"messages",
             {{{"role", "system"}, {"content", prompt.system_text}},
              {{"role", "user"}, {"content", prompt.user_text}}}},
        };
        std::vector<HttpHeader> headers;
        if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);

        BackoffPolicy policy = policy_;
        policy.max_retries = config.max_retries;

        auto started = std::chrono::steady_clock::now();
        HttpResponse res =
            post_with_retries(transport_, "/chat/completions", body.dump(), headers, policy);
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);

        RawCompletion completion = parse_response(res.body);
        completion.latency_ms = elapsed.count();
        if (cache_) cache_->put(key, config.model_id, completion);
        return completion;
    }

    Counters counters() const { return {hits_.load(), misses_.load()}; }

private:
    static RawCompletion parse_response(const std::string& body) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("malformed chat response: ") + e.what());
        }
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
            throw ProviderError("chat response has no choices");
        }
        RawCompletion c;
        try {
            c.text = j["choices"][0].at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw ProviderError("chat response missing choices[0].message.content");
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            c.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
            c.completion_tokens = j["usage"].value("completion_tokens", 0L);
        }
        return c;
    }

    Transport& transport_;
    CompletionCache* cache_;
    std::string api_key_;
    BackoffPolicy policy_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

}  // namespace slrx
