#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace slrx {

// A token is a half-open character span [char_start, char_end) into the text
// it was produced from. Spans are non-overlapping and ordered.
struct Token {
    int token_id = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
};

// Deterministic text -> token mapping. Implementations must be stateless after
// construction so one instance can be shared across worker threads.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<Token> tokenize(std::string_view text) const = 0;
};

// Reference tokenizer: maximal runs of non-whitespace bytes. Multi-byte UTF-8
// sequences never contain ASCII whitespace, so they stay within one token.
class WhitespaceTokenizer : public Tokenizer {
public:
    std::vector<Token> tokenize(std::string_view text) const override {
        std::vector<Token> tokens;
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            if (i >= text.size()) break;
            std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            tokens.push_back({static_cast<int>(tokens.size()), start, i});
        }
        return tokens;
    }
};

// Cuts text after its first max_tokens tokens (by character offset), leaving
// shorter inputs untouched.
inline std::string_view truncate_to_tokens(std::string_view text, const Tokenizer& tokenizer,
                                           std::size_t max_tokens) {
    if (max_tokens == 0) return text.substr(0, 0);
    auto tokens = tokenizer.tokenize(text);
    if (tokens.size() <= max_tokens) return text;
    return text.substr(0, tokens[max_tokens - 1].char_end);
}

}  // namespace slrx
