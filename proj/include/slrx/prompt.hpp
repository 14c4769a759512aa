#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slrx/entries.hpp"
#include "slrx/errors.hpp"
#include "slrx/retrieval.hpp"

namespace slrx {

// System instruction sent with every extraction request. Golden text; the
// acceptance suite asserts byte-identity, so do not reflow or edit casually.
inline constexpr std::string_view kBaseSystemPrompt =
    "You are a helpful and meticulous research assistant who answers questions about study "
    "details carefully and adequately from context chunks of provided research papers. "
    "Formatting: Carefully read the QUESTION, ANSWERS, AND CONTEXT. If one or more options are "
    "correct, return ONLY a JSON array of the correct option IDs, e.g., [\"A\", \"C\"]. Return "
    "the IDs exactly as provided in ANSWERS (case-sensitive). Do NOT include any text besides "
    "the JSON array.";

struct ChunkRef {
    std::string doc_id;
    int chunk_index = 0;
    double score = 0.0;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::string entry_id;
    std::vector<ChunkRef> chunk_refs;  // ordered by score descending
};

// ANSWERS payload: a JSON array of the rendered option ids, in option order,
// with ", " separators.
inline std::string render_answers_array(const DataEntry& entry) {
    std::string out = "[";
    for (std::size_t i = 0; i < entry.options.size(); ++i) {
        if (i > 0) out += ", ";
        out += nlohmann::json(render_option(entry.options[i])).dump();
    }
    out += "]";
    return out;
}

// Renders the user message with its three sections. Chunks must already be
// sorted by score descending (rank_chunks output order).
inline PromptBundle build_prompt(const DataEntry& entry, std::span<const ScoredChunk> chunks) {
    if (chunks.empty()) throw PromptError("entry '" + entry.entry_id + "': no context chunks");
    for (std::size_t i = 1; i < chunks.size(); ++i) {
        if (chunks[i].score > chunks[i - 1].score) {
            throw PromptError("entry '" + entry.entry_id + "': chunks not sorted by score");
        }
    }

    PromptBundle bundle;
    bundle.system_text = std::string(kBaseSystemPrompt);
    bundle.entry_id = entry.entry_id;

    std::string context;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const Chunk& chunk = *chunks[i].chunk;
        if (i > 0) context += '\n';
        context += "--- CHUNK " + std::to_string(i + 1) + " (doc=" + chunk.doc_id +
                   ", idx=" + std::to_string(chunk.chunk_index) + ") ---\n";
        context += chunk.text;
        bundle.chunk_refs.push_back({chunk.doc_id, chunk.chunk_index, chunks[i].score});
    }

    bundle.user_text = "QUESTION:\n" + entry.question + "\n\nANSWERS:\n" +
                       render_answers_array(entry) + "\n\nCONTEXT:\n" + context;
    return bundle;
}

}  // namespace slrx
