#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slrx/chat_client.hpp"
#include "slrx/corpus.hpp"
#include "slrx/embedding.hpp"
#include "slrx/entries.hpp"
#include "slrx/errors.hpp"
#include "slrx/evaluation.hpp"
#include "slrx/extraction.hpp"
#include "slrx/http.hpp"
#include "slrx/mock_llm.hpp"
#include "slrx/prompt.hpp"
#include "slrx/retrieval.hpp"
#include "slrx/tokenizer.hpp"

namespace slrx {

struct LLMEndpointConfig {
    std::string endpoint = "https://openrouter.ai/api/v1";
    double temperature = 0.0;
    int max_output_tokens = 256;
    int timeout_s = 60;
    int max_retries = 3;
};

struct EmbeddingConfig {
    std::string kind = "hash";  // "hash" or "remote"
    EmbeddingProviderSpec spec{"hash-256", HashEmbedder::kDim, 512, "", ""};
};

// A whole run, loaded from one JSON config file. Relative paths are resolved
// against the config file's directory.
struct RunConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path entries_path;
    std::vector<std::string> model_ids;
    EmbeddingConfig embedding;
    ChunkingParams chunking;
    int k = 3;
    std::filesystem::path cache_dir;
    std::filesystem::path output_path;
    int parallelism = 4;
    std::string api_key_env = "OPENROUTER_API_KEY";
    LLMEndpointConfig llm;
    std::optional<std::filesystem::path> mock_fixtures_path;
};

inline RunConfig load_run_config(const std::filesystem::path& config_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file: " + config_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_path.string() + ": " + e.what());
    }

    auto base = std::filesystem::absolute(config_path).parent_path();
    auto resolve = [&](const std::string& p) { return base / std::filesystem::path(p); };

    RunConfig config;
    try {
        config.corpus_path = resolve(j.at("corpus_path").get<std::string>());
        config.entries_path = resolve(j.at("entries_path").get<std::string>());
        config.model_ids = j.at("model_ids").get<std::vector<std::string>>();
        config.cache_dir = resolve(j.value("cache_dir", ".slrx-cache"));
        config.output_path = resolve(j.value("output_path", "results.jsonl"));
        config.k = j.value("k", 3);
        config.parallelism = j.value("parallelism", 4);
        config.api_key_env = j.value("api_key_env", config.api_key_env);
        if (j.contains("chunking")) {
            config.chunking.chunk_size = j["chunking"].value("chunk_size", 1000);
            config.chunking.overlap = j["chunking"].value("overlap", 500);
        }
        if (j.contains("embedding")) {
            const auto& e = j["embedding"];
            config.embedding.kind = e.value("kind", "hash");
            config.embedding.spec.name = e.value("name", config.embedding.spec.name);
            config.embedding.spec.dim = e.value("dim", config.embedding.spec.dim);
            config.embedding.spec.max_input_tokens =
                e.value("max_input_tokens", config.embedding.spec.max_input_tokens);
            config.embedding.spec.endpoint = e.value("endpoint", "");
            config.embedding.spec.api_key_env = e.value("api_key_env", "");
        }
        if (j.contains("llm")) {
            const auto& l = j["llm"];
            config.llm.endpoint = l.value("endpoint", config.llm.endpoint);
            config.llm.temperature = l.value("temperature", 0.0);
            config.llm.max_output_tokens = l.value("max_output_tokens", 256);
            config.llm.timeout_s = l.value("timeout_s", 60);
            config.llm.max_retries = l.value("max_retries", 3);
        }
        if (j.contains("mock_fixtures_path") && j["mock_fixtures_path"].is_string()) {
            config.mock_fixtures_path = resolve(j["mock_fixtures_path"].get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_path.string() + ": " + e.what());
    }
    return config;
}

inline void validate_run_config(const RunConfig& config, bool offline) {
    if (config.model_ids.empty()) throw ConfigError("model_ids must be non-empty");
    for (const auto& id : config.model_ids) {
        if (id.empty()) throw ConfigError("model_ids must not contain empty ids");
    }
    if (config.k < 1) throw ConfigError("k must be >= 1");
    if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    config.chunking.validate();
    if (!std::filesystem::exists(config.corpus_path)) {
        throw ConfigError("corpus path does not exist: " + config.corpus_path.string());
    }
    if (!std::filesystem::exists(config.entries_path)) {
        throw ConfigError("entries path does not exist: " + config.entries_path.string());
    }
    if (config.embedding.kind != "hash" && config.embedding.kind != "remote") {
        throw ConfigError("embedding.kind must be \"hash\" or \"remote\"");
    }
    if (!offline && config.embedding.kind == "remote" && config.embedding.spec.endpoint.empty()) {
        throw ConfigError("remote embedding provider needs an endpoint");
    }
    if (offline && config.mock_fixtures_path &&
        !std::filesystem::exists(*config.mock_fixtures_path)) {
        throw ConfigError("mock fixtures path does not exist: " +
                          config.mock_fixtures_path->string());
    }
}

namespace detail {

inline std::string env_or_throw(const std::string& name, const std::string& what) {
    const char* value = std::getenv(name.c_str());
    if (!value || !*value) {
        throw ConfigError("environment variable " + name + " (" + what + ") is not set");
    }
    return value;
}

class EventLog {
public:
    void emit(const nlohmann::json& event) {
        std::lock_guard<std::mutex> lock(mu_);
        std::cerr << event.dump() << '\n';
    }

private:
    std::mutex mu_;
};

}  // namespace detail

struct RunHooks {
    // Called under the result lock as each record lands (completion order, not
    // output order). Throwing aborts the run before the results file is
    // written; the completion cache keeps whatever finished.
    std::function<void(const ExtractionRecord&)> on_record;
};

struct RunStats {
    std::size_t records = 0;
    std::size_t errors = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
};

// Full extraction run: ingest -> chunk -> embed (cached) -> rank/prompt/query/
// parse per (document, entry, model) -> one JSONL record per item, in
// (doc_id, entry_id, model_id) order.
inline RunStats run_extract(const RunConfig& config, bool offline = false,
                            const RunHooks* hooks = nullptr) {
    validate_run_config(config, offline);

    // Everything that can fail on configuration happens before any transport
    // is constructed.
    std::string llm_api_key;
    if (!offline) llm_api_key = detail::env_or_throw(config.api_key_env, "LLM API key");

    WhitespaceTokenizer tokenizer;
    std::unique_ptr<Transport> embed_transport;
    std::unique_ptr<EmbeddingProvider> embedder;
    if (offline || config.embedding.kind == "hash") {
        embedder = std::make_unique<HashEmbedder>(config.embedding.spec.max_input_tokens);
    } else {
        std::string embed_key;
        if (!config.embedding.spec.api_key_env.empty()) {
            embed_key = detail::env_or_throw(config.embedding.spec.api_key_env,
                                             "embedding API key");
        }
        embed_transport = std::make_unique<HttplibTransport>(
            config.embedding.spec.endpoint, std::chrono::seconds(config.llm.timeout_s));
        embedder = std::make_unique<RemoteEmbeddingProvider>(config.embedding.spec,
                                                             *embed_transport, embed_key);
    }

    std::unique_ptr<Transport> llm_transport;
    if (offline) {
        if (config.mock_fixtures_path) {
            llm_transport = std::make_unique<ScriptedMockLlm>(*config.mock_fixtures_path);
        } else {
            llm_transport = std::make_unique<RuleBasedMockLlm>();
        }
    } else {
        llm_transport = std::make_unique<HttplibTransport>(
            config.llm.endpoint, std::chrono::seconds(config.llm.timeout_s));
    }

    auto documents = load_corpus(config.corpus_path);
    auto entries = load_entries(config.entries_path);

    detail::EventLog log;
    log.emit({{"event", "run_start"},
              {"documents", documents.size()},
              {"entries", entries.size()},
              {"models", config.model_ids.size()},
              {"offline", offline}});

    // Chunk + embed every document once, through the on-disk cache.
    const std::string provider_name = embedder->spec().name;
    EmbeddingCache embedding_cache(config.cache_dir);
    std::vector<DocumentIndex> indexes(documents.size());
    {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto embed_worker = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= documents.size()) return;
                try {
                    const Document& doc = documents[i];
                    DocumentIndex index;
                    index.doc_id = doc.doc_id;
                    index.chunks = chunk_document(doc, config.chunking, tokenizer);
                    std::vector<std::string> texts;
                    texts.reserve(index.chunks.size());
                    for (const auto& c : index.chunks) texts.push_back(c.text);
                    if (auto cached = embedding_cache.load(provider_name, doc.doc_id, index.chunks)) {
                        index.vectors = std::move(*cached);
                    } else {
                        index.vectors = embedder->embed_texts(texts);
                        embedding_cache.store(provider_name, doc.doc_id, index.chunks,
                                              index.vectors);
                    }
                    indexes[i] = std::move(index);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        std::size_t n_threads =
            std::min<std::size_t>(config.parallelism, std::max<std::size_t>(documents.size(), 1));
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(embed_worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Query vectors, one per entry.
    std::vector<RetrievalQuery> queries;
    queries.reserve(entries.size());
    for (const auto& e : entries) queries.push_back({e.entry_id, make_query_text(e)});
    std::vector<std::string> query_texts;
    query_texts.reserve(queries.size());
    for (const auto& q : queries) query_texts.push_back(q.query_text);
    auto query_vectors = embedder->embed_texts(query_texts);

    // Work items in deterministic output order.
    struct WorkItem {
        const DocumentIndex* doc;
        const DataEntry* entry;
        const EmbeddingVector* query_vec;
        std::string model_id;
    };
    std::vector<std::size_t> entry_order(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) entry_order[i] = i;
    std::sort(entry_order.begin(), entry_order.end(), [&](std::size_t a, std::size_t b) {
        return entries[a].entry_id < entries[b].entry_id;
    });
    std::vector<std::string> models = config.model_ids;
    std::sort(models.begin(), models.end());

    std::vector<WorkItem> items;
    items.reserve(indexes.size() * entries.size() * models.size());
    for (const auto& index : indexes) {
        for (std::size_t e : entry_order) {
            for (const auto& model : models) {
                items.push_back({&index, &entries[e], &query_vectors[e], model});
            }
        }
    }

    CompletionCache completion_cache(config.cache_dir);
    BackoffPolicy policy;
    policy.max_retries = config.llm.max_retries;
    ChatClient client(*llm_transport, &completion_cache, llm_api_key, policy);

    std::vector<ExtractionRecord> records(items.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> cancelled{false};
    std::exception_ptr failure;
    std::mutex mu;

    auto worker = [&] {
        for (;;) {
            if (cancelled.load()) return;
            std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            const WorkItem& item = items[i];
            LLMConfig llm_config{item.model_id, config.llm.temperature,
                                 config.llm.max_output_tokens,
                                 std::chrono::seconds(config.llm.timeout_s),
                                 config.llm.max_retries};
            ExtractionRecord record =
                extract_entry(*item.doc, *item.entry, *item.query_vec, client, llm_config, config.k);

            std::lock_guard<std::mutex> lock(mu);
            records[i] = std::move(record);
            const ExtractionRecord& stored = records[i];
            log.emit({{"event", "record"},
                      {"doc_id", stored.doc_id},
                      {"entry_id", stored.entry_id},
                      {"model_id", stored.model_id},
                      {"status", stored.error ? "error" : "ok"},
                      {"error", stored.error ? nlohmann::json(*stored.error)
                                             : nlohmann::json(nullptr)}});
            if (hooks && hooks->on_record) {
                try {
                    hooks->on_record(stored);
                } catch (...) {
                    if (!failure) failure = std::current_exception();
                    cancelled.store(true);
                    return;
                }
            }
        }
    };

    std::vector<std::thread> pool;
    std::size_t n_threads =
        std::min<std::size_t>(config.parallelism, std::max<std::size_t>(items.size(), 1));
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    write_records(config.output_path, records);

    RunStats stats;
    stats.records = records.size();
    for (const auto& r : records) {
        if (r.error) ++stats.errors;
    }
    auto counters = client.counters();
    stats.cache_hits = counters.cache_hits;
    stats.cache_misses = counters.cache_misses;
    log.emit({{"event", "run_end"},
              {"records", stats.records},
              {"errors", stats.errors},
              {"cache_hits", stats.cache_hits},
              {"cache_misses", stats.cache_misses}});
    return stats;
}

struct EvaluationOutput {
    AgreementMatrix matrix;
    std::vector<std::string> model_ids;
    std::map<std::string, PRResult> precision_recall;
};

// Compares extraction results against human annotations: pairwise kappa over
// raters + models, and per-model precision/recall against the first two
// raters. Writes report.json, kappa_matrix.csv and precision_recall.csv.
inline EvaluationOutput run_evaluate(const std::filesystem::path& results_path,
                                     const std::filesystem::path& annotations_path,
                                     const std::filesystem::path& out_dir) {
    auto records = read_records(results_path);
    if (records.empty()) throw EvalError("results file has no records: " + results_path.string());
    auto raters = load_annotations(annotations_path);
    if (raters.size() < 2) {
        throw EvalError("need at least 2 human raters, found " + std::to_string(raters.size()));
    }

    std::set<std::string> model_id_set;
    for (const auto& r : records) model_id_set.insert(r.model_id);

    EvaluationOutput output;
    output.model_ids.assign(model_id_set.begin(), model_id_set.end());

    std::vector<AnnotationSet> sets = raters;
    for (const auto& id : output.model_ids) {
        sets.push_back(annotations_from_records(id, records));
    }
    output.matrix = agreement_matrix(sets);
    for (const auto& id : output.model_ids) {
        output.precision_recall[id] =
            precision_recall(annotations_from_records(id, records), raters[0], raters[1]);
    }

    std::filesystem::create_directories(out_dir);
    auto write_file = [&](const std::filesystem::path& name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write report file: " + (out_dir / name).string());
        out << content;
    };
    write_file("kappa_matrix.csv", kappa_matrix_csv(output.matrix));
    write_file("precision_recall.csv",
               precision_recall_csv(output.model_ids, output.precision_recall));
    write_file("report.json",
               evaluation_report_json(output.matrix, output.model_ids, output.precision_recall)
                       .dump(2) +
                   "\n");
    return output;
}

}  // namespace slrx
