#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "slrx/corpus.hpp"
#include "slrx/embedding.hpp"
#include "slrx/errors.hpp"

namespace slrx {

struct RetrievalQuery {
    std::string entry_id;
    std::string query_text;
};

// Non-owning: points into the chunk sequence handed to rank_chunks, which must
// outlive the result.
struct ScoredChunk {
    const Chunk* chunk = nullptr;
    double score = 0.0;
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw DimError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DegenerateVectorError("zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Top-k chunks by cosine similarity to the query, ties broken by ascending
// chunk_index. chunks and vectors are parallel sequences.
inline std::vector<ScoredChunk> rank_chunks(const EmbeddingVector& query,
                                            std::span<const Chunk> chunks,
                                            std::span<const EmbeddingVector> vectors, int k = 3) {
    if (k < 1) throw QueryError("k must be >= 1");
    if (chunks.size() != vectors.size()) {
        throw DimError("chunks and vectors differ in length");
    }
    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        std::string where =
            "chunk " + chunks[i].doc_id + "/" + std::to_string(chunks[i].chunk_index) + ": ";
        try {
            scored.push_back({&chunks[i], cosine_similarity(query, vectors[i])});
        } catch (const DimError& e) {
            throw DimError(where + e.what());
        } catch (const DegenerateVectorError& e) {
            throw DegenerateVectorError(where + e.what());
        }
    }
    auto better = [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk->chunk_index < b.chunk->chunk_index;
    };
    std::size_t take = std::min(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), better);
    scored.resize(take);
    return scored;
}

}  // namespace slrx
