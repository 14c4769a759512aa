#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slrx/errors.hpp"
#include "slrx/tokenizer.hpp"
#include "slrx/util.hpp"

namespace slrx {

struct Document {
    std::string doc_id;
    std::string text;
};

struct ChunkingParams {
    int chunk_size = 1000;
    int overlap = 500;

    int stride() const { return chunk_size - overlap; }

    void validate() const {
        if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
        if (overlap < 0 || overlap >= chunk_size) {
            throw ConfigError("overlap must satisfy 0 <= overlap < chunk_size");
        }
    }
};

// A token window of one document. text is the verbatim substring of the
// document from the first token's char_start to the last token's char_end.
struct Chunk {
    std::string doc_id;
    int chunk_index = 0;
    int token_start = 0;
    int token_end = 0;  // exclusive
    std::string text;
};

// Sliding-window chunker: window i covers tokens
// [i*stride, min(i*stride + chunk_size, T)); emission stops once a window's
// end reaches T. The final window may be shorter than chunk_size.
inline std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params,
                                         const Tokenizer& tokenizer) {
    params.validate();
    auto tokens = tokenizer.tokenize(doc.text);
    if (tokens.empty()) {
        throw IngestError("document '" + doc.doc_id + "' has no tokens");
    }
    const int total = static_cast<int>(tokens.size());
    const int stride = params.stride();

    std::vector<Chunk> chunks;
    for (int start = 0;; start += stride) {
        int end = std::min(start + params.chunk_size, total);
        std::size_t char_begin = tokens[start].char_start;
        std::size_t char_end = tokens[end - 1].char_end;
        chunks.push_back({doc.doc_id, start / stride, start, end,
                          doc.text.substr(char_begin, char_end - char_begin)});
        if (end >= total) break;
    }
    return chunks;
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IngestError("read failed: " + path.string());
    return buf.str();
}

inline void check_document(const Document& doc) {
    if (doc.doc_id.empty()) throw IngestError("document with empty id");
    if (trim(doc.text).empty()) {
        throw IngestError("document '" + doc.doc_id + "' has empty text");
    }
}

inline std::vector<Document> load_corpus_dir(const std::filesystem::path& dir) {
    std::vector<Document> docs;
    std::set<std::string> seen;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        Document doc{entry.path().stem().string(), read_text_file(entry.path())};
        check_document(doc);
        if (!seen.insert(doc.doc_id).second) {
            throw IngestError("duplicate doc_id '" + doc.doc_id + "'");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::vector<Document> load_corpus_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IngestError("cannot read file: " + file.string());
    std::vector<Document> docs;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text")) {
            throw IngestError(file.string() + ":" + std::to_string(line_no) +
                              ": expected object with \"id\" and \"text\"");
        }
        Document doc{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
        check_document(doc);
        if (!seen.insert(doc.doc_id).second) {
            throw IngestError("duplicate doc_id '" + doc.doc_id + "'");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace detail

// Loads a corpus from a directory of .txt files (doc_id = filename stem) or a
// JSON-lines file with {"id", "text"} per line. Documents come back sorted by
// doc_id.
inline std::vector<Document> load_corpus(const std::filesystem::path& source) {
    if (!std::filesystem::exists(source)) {
        throw IngestError("corpus path does not exist: " + source.string());
    }
    std::vector<Document> docs = std::filesystem::is_directory(source)
                                     ? detail::load_corpus_dir(source)
                                     : detail::load_corpus_jsonl(source);
    if (docs.empty()) throw IngestError("empty corpus: " + source.string());
    std::sort(docs.begin(), docs.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    return docs;
}

}  // namespace slrx
