#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slrx {

// Stable short codes; these appear verbatim in extraction records and CLI events.
enum class ErrorCode {
    ingest,
    query,
    provider,
    request,
    timeout,
    dim_mismatch,
    degenerate_vector,
    prompt,
    no_json_array,
    unknown_option_id,
    empty_answer,
    eval,
    config,
    internal,
};

inline constexpr std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ingest: return "ingest_error";
        case ErrorCode::query: return "query_error";
        case ErrorCode::provider: return "provider_error";
        case ErrorCode::request: return "request_error";
        case ErrorCode::timeout: return "timeout";
        case ErrorCode::dim_mismatch: return "dim_error";
        case ErrorCode::degenerate_vector: return "degenerate_vector";
        case ErrorCode::prompt: return "prompt_error";
        case ErrorCode::no_json_array: return "no_json_array";
        case ErrorCode::unknown_option_id: return "unknown_option_id";
        case ErrorCode::empty_answer: return "empty_answer";
        case ErrorCode::eval: return "eval_error";
        case ErrorCode::config: return "config_error";
        case ErrorCode::internal: return "internal_error";
    }
    return "internal_error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

struct IngestError : Error {
    explicit IngestError(const std::string& m) : Error(ErrorCode::ingest, m) {}
};

struct QueryError : Error {
    explicit QueryError(const std::string& m) : Error(ErrorCode::query, m) {}
};

struct ProviderError : Error {
    explicit ProviderError(const std::string& m) : Error(ErrorCode::provider, m) {}
};

struct RequestError : Error {
    explicit RequestError(const std::string& m) : Error(ErrorCode::request, m) {}
};

struct TimeoutError : Error {
    explicit TimeoutError(const std::string& m) : Error(ErrorCode::timeout, m) {}
};

struct DimError : Error {
    explicit DimError(const std::string& m) : Error(ErrorCode::dim_mismatch, m) {}
};

struct DegenerateVectorError : Error {
    explicit DegenerateVectorError(const std::string& m) : Error(ErrorCode::degenerate_vector, m) {}
};

struct PromptError : Error {
    explicit PromptError(const std::string& m) : Error(ErrorCode::prompt, m) {}
};

// Raised by the answer parser; code is one of no_json_array, unknown_option_id, empty_answer.
struct ParseError : Error {
    ParseError(ErrorCode code, const std::string& m) : Error(code, m) {}
};

struct EvalError : Error {
    explicit EvalError(const std::string& m) : Error(ErrorCode::eval, m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorCode::config, m) {}
};

}  // namespace slrx
