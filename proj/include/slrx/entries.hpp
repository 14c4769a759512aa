#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slrx/errors.hpp"

namespace slrx {

struct Option {
    std::string id;
    std::string label;
};

// A review question with its closed set of answer options. option ids are
// case-significant; by default an option's id is its label text, but short ids
// (A, B, ...) may be declared and are then shown as "A: label" in prompts.
struct DataEntry {
    std::string entry_id;
    std::string question;
    std::vector<Option> options;

    const Option* find_option(std::string_view id) const {
        for (const auto& o : options) {
            if (o.id == id) return &o;
        }
        return nullptr;
    }

    void validate() const {
        if (entry_id.empty()) throw ConfigError("data entry with empty entry_id");
        if (question.empty()) throw ConfigError("entry '" + entry_id + "': empty question");
        if (options.size() < 2) throw ConfigError("entry '" + entry_id + "': needs >= 2 options");
        std::set<std::string_view> ids;
        for (const auto& o : options) {
            if (o.id.empty()) throw ConfigError("entry '" + entry_id + "': empty option id");
            if (!ids.insert(o.id).second) {
                throw ConfigError("entry '" + entry_id + "': duplicate option id '" + o.id + "'");
            }
        }
    }
};

inline std::string render_option(const Option& o) {
    return o.id == o.label ? o.id : o.id + ": " + o.label;
}

// Query text handed to the retriever: the question plus every rendered option,
// newline-separated, so candidate-answer vocabulary reaches the embedder.
inline std::string make_query_text(const DataEntry& entry) {
    std::string out = entry.question;
    for (const auto& o : entry.options) {
        out += '\n';
        out += render_option(o);
    }
    return out;
}

// Entry configuration: JSON array of
// {"entry_id", "question", "options": [{"id", "label"} | "label", ...]}.
// A bare string option means id == label.
inline std::vector<DataEntry> load_entries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read entries file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError(path.string() + ": expected a JSON array of entries");

    std::vector<DataEntry> entries;
    std::set<std::string> seen;
    for (const auto& item : j) {
        DataEntry entry;
        try {
            entry.entry_id = item.at("entry_id").get<std::string>();
            entry.question = item.at("question").get<std::string>();
            for (const auto& opt : item.at("options")) {
                if (opt.is_string()) {
                    auto s = opt.get<std::string>();
                    entry.options.push_back({s, s});
                } else {
                    auto id = opt.at("id").get<std::string>();
                    auto label = opt.contains("label") ? opt.at("label").get<std::string>() : id;
                    entry.options.push_back({std::move(id), std::move(label)});
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        entry.validate();
        if (!seen.insert(entry.entry_id).second) {
            throw ConfigError("duplicate entry_id '" + entry.entry_id + "'");
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw ConfigError(path.string() + ": no entries");
    return entries;
}

}  // namespace slrx
