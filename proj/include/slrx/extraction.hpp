#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slrx/answer_parser.hpp"
#include "slrx/chat_client.hpp"
#include "slrx/corpus.hpp"
#include "slrx/embedding.hpp"
#include "slrx/entries.hpp"
#include "slrx/errors.hpp"
#include "slrx/prompt.hpp"
#include "slrx/retrieval.hpp"
#include "slrx/util.hpp"

namespace slrx {

// One (document, entry, model) result. answer_ids is empty exactly when error
// is set; chunk_refs record which context the model saw.
struct ExtractionRecord {
    std::string doc_id;
    std::string entry_id;
    std::string model_id;
    std::vector<std::string> answer_ids;
    std::optional<ParseMode> parse_mode;
    std::string raw_text;
    std::vector<ChunkRef> chunk_refs;
    std::optional<std::string> error;
    std::string timestamp;
};

// A chunked and embedded document, ready for retrieval.
struct DocumentIndex {
    std::string doc_id;
    std::vector<Chunk> chunks;
    std::vector<EmbeddingVector> vectors;
};

// Runs retrieval -> prompt -> completion -> parse for one work item. Stage
// failures never escape: they land in record.error with empty answer_ids.
inline ExtractionRecord extract_entry(const DocumentIndex& doc, const DataEntry& entry,
                                      const EmbeddingVector& query_vec, ChatClient& client,
                                      const LLMConfig& config, int k = 3) {
    ExtractionRecord record;
    record.doc_id = doc.doc_id;
    record.entry_id = entry.entry_id;
    record.model_id = config.model_id;
    record.timestamp = iso8601_utc_now();
    try {
        auto ranked = rank_chunks(query_vec, doc.chunks, doc.vectors, k);
        PromptBundle prompt = build_prompt(entry, ranked);
        record.chunk_refs = prompt.chunk_refs;
        RawCompletion completion = client.complete(config, prompt);
        record.raw_text = completion.text;
        ParsedAnswer parsed = parse_answer(completion.text, entry);
        record.answer_ids = std::move(parsed.answer_ids);
        record.parse_mode = parsed.mode;
    } catch (const Error& e) {
        record.error = std::string(e.code_name());
        record.answer_ids.clear();
        record.parse_mode.reset();
    } catch (const std::exception&) {
        record.error = std::string(error_code_name(ErrorCode::internal));
        record.answer_ids.clear();
        record.parse_mode.reset();
    }
    return record;
}

inline nlohmann::json record_to_json(const ExtractionRecord& r) {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& ref : r.chunk_refs) {
        refs.push_back({{"doc_id", ref.doc_id}, {"chunk_index", ref.chunk_index}, {"score", ref.score}});
    }
    return {
        {"doc_id", r.doc_id},
        {"entry_id", r.entry_id},
        {"model_id", r.model_id},
        {"answer_ids", r.answer_ids},
        {"parse_mode", r.parse_mode ? nlohmann::json(parse_mode_name(*r.parse_mode))
                                    : nlohmann::json(nullptr)},
        {"raw_text", r.raw_text},
        {"chunk_refs", std::move(refs)},
        {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
        {"timestamp", r.timestamp},
    };
}

inline ExtractionRecord record_from_json(const nlohmann::json& j) {
    ExtractionRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.entry_id = j.at("entry_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.answer_ids = j.at("answer_ids").get<std::vector<std::string>>();
    if (j.contains("parse_mode") && j["parse_mode"].is_string()) {
        r.parse_mode = j["parse_mode"].get<std::string>() == "strict" ? ParseMode::strict
                                                                      : ParseMode::lenient;
    }
    r.raw_text = j.value("raw_text", "");
    for (const auto& ref : j.value("chunk_refs", nlohmann::json::array())) {
        r.chunk_refs.push_back({ref.at("doc_id").get<std::string>(),
                                ref.at("chunk_index").get<int>(), ref.at("score").get<double>()});
    }
    if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
    r.timestamp = j.value("timestamp", "");
    return r;
}

inline void write_records(const std::filesystem::path& path,
                          const std::vector<ExtractionRecord>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write results file: " + path.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<ExtractionRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read results file: " + path.string());
    std::vector<ExtractionRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace slrx
