#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slrx/backoff.hpp"
#include "slrx/corpus.hpp"
#include "slrx/errors.hpp"
#include "slrx/http.hpp"
#include "slrx/tokenizer.hpp"
#include "slrx/util.hpp"

namespace slrx {

using EmbeddingVector = std::vector<double>;

struct EmbeddingProviderSpec {
    std::string name;           // provider/model identifier; also the cache key
    int dim = 0;
    int max_input_tokens = 512; // inputs are cut to this many tokens client-side
    std::string endpoint;       // empty for local providers
    std::string api_key_env;    // env var holding the bearer token, if any
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const EmbeddingProviderSpec& spec() const = 0;

    // Embeds texts in order; output length equals input length. Every input is
    // truncated to spec().max_input_tokens tokens before encoding.
    virtual std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) = 0;
};

// Deterministic offline embedder: tokens (whitespace, lowercased) are hashed
// with 64-bit FNV-1a into 256 buckets; bucket counts are L2-normalized.
class HashEmbedder : public EmbeddingProvider {
public:
    static constexpr int kDim = 256;

    explicit HashEmbedder(int max_input_tokens = 512) {
        if (max_input_tokens < 1) throw ConfigError("max_input_tokens must be >= 1");
        spec_ = {"hash-256", kDim, max_input_tokens, "", ""};
    }

    const EmbeddingProviderSpec& spec() const override { return spec_; }

    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(embed_one(text));
        return out;
    }

private:
    EmbeddingVector embed_one(const std::string& text) const {
        auto tokens = tokenizer_.tokenize(text);
        if (tokens.empty()) throw QueryError("cannot embed empty text");
        std::size_t count = std::min(tokens.size(), static_cast<std::size_t>(spec_.max_input_tokens));
        EmbeddingVector vec(kDim, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            std::string token =
                to_lower_ascii(std::string_view(text).substr(tokens[i].char_start,
                                                             tokens[i].char_end - tokens[i].char_start));
            vec[fnv1a64(token) % kDim] += 1.0;
        }
        double norm = 0.0;
        for (double v : vec) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : vec) v /= norm;
        return vec;
    }

    EmbeddingProviderSpec spec_;
    WhitespaceTokenizer tokenizer_;
};

// HTTP embeddings provider speaking the common wire format:
// POST {endpoint}/embeddings {"model", "input": [...]} ->
// {"data": [{"index", "embedding"}, ...]}.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(EmbeddingProviderSpec spec, Transport& transport,
                            std::string api_key = "", BackoffPolicy policy = {})
        : spec_(std::move(spec)), transport_(transport), api_key_(std::move(api_key)),
          policy_(std::move(policy)) {
        if (spec_.max_input_tokens < 1) throw ConfigError("max_input_tokens must be >= 1");
        if (spec_.dim < 1) throw ConfigError("embedding dim must be >= 1");
        if (spec_.name.empty()) throw ConfigError("embedding provider name must be non-empty");
    }

    const EmbeddingProviderSpec& spec() const override { return spec_; }

    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override {
        nlohmann::json input = nlohmann::json::array();
        for (const auto& text : texts) {
            if (trim(text).empty()) throw QueryError("cannot embed empty text");
            input.push_back(std::string(
                truncate_to_tokens(text, tokenizer_, static_cast<std::size_t>(spec_.max_input_tokens))));
        }
        nlohmann::json body = {{"model", spec_.name}, {"input", std::move(input)}};

        std::vector<HttpHeader> headers;
        if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);

        HttpResponse res = post_with_retries(transport_, "/embeddings", body.dump(), headers, policy_);
        return parse_response(res.body, texts.size());
    }

private:
    std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("malformed embeddings response: ") + e.what());
        }
        if (!j.contains("data") || !j["data"].is_array() || j["data"].size() != expected) {
            throw ProviderError("embeddings response does not cover all inputs");
        }
        std::vector<EmbeddingVector> out(expected);
        std::vector<bool> filled(expected, false);
        for (const auto& item : j["data"]) {
            std::size_t index = item.at("index").get<std::size_t>();
            if (index >= expected || filled[index]) {
                throw ProviderError("embeddings response has bad index " + std::to_string(index));
            }
            EmbeddingVector vec = item.at("embedding").get<EmbeddingVector>();
            if (spec_.dim > 0 && vec.size() != static_cast<std::size_t>(spec_.dim)) {
                throw ProviderError("embedding dim " + std::to_string(vec.size()) +
                                    " != expected " + std::to_string(spec_.dim));
            }
            for (double v : vec) {
                if (!std::isfinite(v)) throw ProviderError("non-finite value in embedding");
            }
            out[index] = std::move(vec);
            filled[index] = true;
        }
        return out;
    }

    EmbeddingProviderSpec spec_;
    Transport& transport_;
    std::string api_key_;
    BackoffPolicy policy_;
    WhitespaceTokenizer tokenizer_;
};

// On-disk chunk-embedding cache: one JSONL file per (provider, document),
// lines {"chunk_index", "content_hash", "vector"}. A document's cached vectors
// are used only when every chunk matches by index and content hash.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path cache_dir)
        : root_(std::move(cache_dir) / "embeddings") {}

    std::optional<std::vector<EmbeddingVector>> load(const std::string& provider,
                                                     const std::string& doc_id,
                                                     const std::vector<Chunk>& chunks) const {
        std::ifstream in(doc_path(provider, doc_id));
        if (!in) return std::nullopt;
        std::map<int, std::pair<std::string, EmbeddingVector>> cached;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
                cached[j.at("chunk_index").get<int>()] = {j.at("content_hash").get<std::string>(),
                                                          j.at("vector").get<EmbeddingVector>()};
            } catch (const nlohmann::json::exception&) {
                return std::nullopt;  // stale or corrupt cache file; recompute
            }
        }
        std::vector<EmbeddingVector> vectors;
        vectors.reserve(chunks.size());
        for (const auto& chunk : chunks) {
            auto it = cached.find(chunk.chunk_index);
            if (it == cached.end() || it->second.first != sha256_hex(chunk.text)) return std::nullopt;
            vectors.push_back(it->second.second);
        }
        return vectors;
    }

    void store(const std::string& provider, const std::string& doc_id,
               const std::vector<Chunk>& chunks, const std::vector<EmbeddingVector>& vectors) {
        std::lock_guard<std::mutex> lock(mu_);
        auto path = doc_path(provider, doc_id);
        std::filesystem::create_directories(path.parent_path());
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::internal, "cannot write cache file: " + tmp.string());
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                nlohmann::json j = {{"chunk_index", chunks[i].chunk_index},
                                    {"content_hash", sha256_hex(chunks[i].text)},
                                    {"vector", vectors[i]}};
                out << j.dump() << '\n';
            }
        }
        std::filesystem::rename(tmp, path);  // atomic swap; readers see old or new
    }

private:
    std::filesystem::path doc_path(const std::string& provider, const std::string& doc_id) const {
        return root_ / sanitize_path_component(provider) / (sanitize_path_component(doc_id) + ".jsonl");
    }

    std::filesystem::path root_;
    std::mutex mu_;
};

}  // namespace slrx
