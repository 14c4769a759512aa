#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slrx/entries.hpp"
#include "slrx/errors.hpp"
#include "slrx/util.hpp"

namespace slrx {

enum class ParseMode { strict, lenient };

inline constexpr std::string_view parse_mode_name(ParseMode m) {
    return m == ParseMode::strict ? "strict" : "lenient";
}

struct ParsedAnswer {
    std::vector<std::string> answer_ids;  // canonical option order, no duplicates
    ParseMode mode = ParseMode::strict;
};

namespace detail {

inline std::optional<std::vector<std::string>> as_string_array(const nlohmann::json& j) {
    if (!j.is_array()) return std::nullopt;
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& el : j) {
        if (!el.is_string()) return std::nullopt;
        out.push_back(el.get<std::string>());
    }
    return out;
}

// Finds the matching ']' for the '[' at `open`, honoring JSON string literals
// and escapes. Returns npos when unbalanced.
inline std::size_t matching_bracket(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

// The first balanced [...] substring that parses as a JSON array of strings.
inline std::optional<std::vector<std::string>> scan_for_string_array(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '[') continue;
        std::size_t close = matching_bracket(text, i);
        if (close == std::string_view::npos) continue;
        nlohmann::json j = nlohmann::json::parse(text.substr(i, close - i + 1), nullptr, false);
        if (j.is_discarded()) continue;
        if (auto arr = as_string_array(j)) return arr;
    }
    return std::nullopt;
}

}  // namespace detail

// Interprets a raw model completion as a set of option ids. Strict mode
// requires the whole (trimmed) text to be a JSON array of strings; otherwise
// the first balanced [...] substring that parses as one is used (lenient).
// Every element must exactly match an option id, case-sensitively. Duplicates
// collapse; the result is ordered by the entry's option order.
inline ParsedAnswer parse_answer(std::string_view raw_text, const DataEntry& entry) {
    std::optional<std::vector<std::string>> elements;
    ParseMode mode = ParseMode::strict;

    nlohmann::json strict = nlohmann::json::parse(trim(raw_text), nullptr, false);
    if (!strict.is_discarded()) elements = detail::as_string_array(strict);
    if (!elements) {
        elements = detail::scan_for_string_array(raw_text);
        mode = ParseMode::lenient;
    }
    if (!elements) {
        throw ParseError(ErrorCode::no_json_array, "no JSON array of strings in completion");
    }
    if (elements->empty()) {
        throw ParseError(ErrorCode::empty_answer, "completion contains an empty answer array");
    }

    for (const auto& value : *elements) {
        if (!entry.find_option(value)) {
            throw ParseError(ErrorCode::unknown_option_id,
                             "'" + value + "' is not an option id of entry '" + entry.entry_id + "'");
        }
    }

    ParsedAnswer parsed;
    parsed.mode = mode;
    for (const auto& option : entry.options) {
        for (const auto& value : *elements) {
            if (value == option.id) {
                parsed.answer_ids.push_back(option.id);
                break;
            }
        }
    }
    return parsed;
}

// Canonical rendering of an answer set; reparsing it yields the same ids.
inline std::string render_answer_ids(const std::vector<std::string>& ids) {
    std::string out = "[";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out += ", ";
        out += nlohmann::json(ids[i]).dump();
    }
    out += "]";
    return out;
}

}  // namespace slrx
