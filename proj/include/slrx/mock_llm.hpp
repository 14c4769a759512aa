#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slrx/answer_parser.hpp"
#include "slrx/errors.hpp"
#include "slrx/http.hpp"
#include "slrx/tokenizer.hpp"

namespace slrx {

namespace detail {

inline std::string user_message_of(const std::string& request_body) {
    nlohmann::json j = nlohmann::json::parse(request_body, nullptr, false);
    if (j.is_discarded() || !j.contains("messages")) return "";
    for (const auto& m : j["messages"]) {
        if (m.value("role", "") == "user") return m.value("content", "");
    }
    return "";
}

inline HttpResponse chat_response(const std::string& content, const std::string& prompt) {
    WhitespaceTokenizer tok;
    nlohmann::json j = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
        {"usage",
         {{"prompt_tokens", tok.tokenize(prompt).size()},
          {"completion_tokens", tok.tokenize(content).size()}}},
    };
    return {200, j.dump()};
}

}  // namespace detail

// Deterministic stand-in model: answers with every option whose label occurs
// verbatim in the prompt's CONTEXT section. Options are recovered from the
// ANSWERS line, so it works for both label-as-id and "A: label" schemes.
class RuleBasedMockLlm : public Transport {
public:
    HttpResponse post_json(const std::string&, const std::string& body,
                           const std::vector<HttpHeader>&) override {
        std::string user = detail::user_message_of(body);
        return detail::chat_response(answer_for(user), user);
    }

    static std::string answer_for(std::string_view user_text) {
        auto answers_pos = user_text.find("ANSWERS:\n");
        auto context_pos = user_text.find("CONTEXT:\n");
        if (answers_pos == std::string_view::npos || context_pos == std::string_view::npos) {
            return "[]";
        }
        auto line_start = answers_pos + 9;
        auto line_end = user_text.find('\n', line_start);
        if (line_end == std::string_view::npos) return "[]";
        std::string_view answers_line = user_text.substr(line_start, line_end - line_start);
        std::string_view context = user_text.substr(context_pos + 9);

        nlohmann::json arr = nlohmann::json::parse(answers_line, nullptr, false);
        if (arr.is_discarded() || !arr.is_array()) return "[]";

        std::vector<std::string> ids;
        for (const auto& el : arr) {
            if (!el.is_string()) continue;
            std::string rendered = el.get<std::string>();
            auto sep = rendered.find(": ");
            std::string id = sep == std::string::npos ? rendered : rendered.substr(0, sep);
            std::string label = sep == std::string::npos ? rendered : rendered.substr(sep + 2);
            if (context.find(label) != std::string_view::npos) ids.push_back(id);
        }
        return render_answer_ids(ids);
    }
};

// Scripted stand-in model driven by a fixtures file:
//   {"rules": [{"contains": "...", "response": "..."}], "default": "..."}
// The first rule whose "contains" text occurs in the user message wins.
class ScriptedMockLlm : public Transport {
public:
    struct Rule {
        std::string contains;
        std::string response;
    };

    explicit ScriptedMockLlm(const std::filesystem::path& fixtures_path) {
        std::ifstream in(fixtures_path);
        if (!in) throw ConfigError("cannot read mock fixtures: " + fixtures_path.string());
        nlohmann::json j;
        try {
            in >> j;
            for (const auto& rule : j.value("rules", nlohmann::json::array())) {
                rules_.push_back({rule.at("contains").get<std::string>(),
                                  rule.at("response").get<std::string>()});
            }
            default_response_ = j.value("default", default_response_);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(fixtures_path.string() + ": " + e.what());
        }
    }

    HttpResponse post_json(const std::string&, const std::string& body,
                           const std::vector<HttpHeader>&) override {
        std::string user = detail::user_message_of(body);
        for (const auto& rule : rules_) {
            if (user.find(rule.contains) != std::string::npos) {
                return detail::chat_response(rule.response, user);
            }
        }
        return detail::chat_response(default_response_, user);
    }

private:
    std::vector<Rule> rules_;
    std::string default_response_ = "No scripted response matches this prompt.";
};

}  // namespace slrx
