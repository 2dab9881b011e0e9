#pragma once

#include <stdexcept>
#include <string>

namespace pdechain {

enum class ErrorCode {
    invalid_input,
    parse_error,
    unknown_identifier,
    numeric_domain,
    duplicate_seq,
    unknown_node,
    cyclic_graph,
    invalid_pattern,
    degenerate_embedding,
    unknown_tool,
    schema_violation,
    dangling_handle,
    tool_failure,
    stability,
    non_convergence,
    provider_failure,
    auth_failure,
    script_exhausted,
    session_failure,
    io_error,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Parse failures carry the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t position)
        : Error(ErrorCode::parse_error, std::move(message)), position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_ = 0;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input: return "invalid_input";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::unknown_identifier: return "unknown_identifier";
        case ErrorCode::numeric_domain: return "numeric_domain";
        case ErrorCode::duplicate_seq: return "duplicate_seq";
        case ErrorCode::unknown_node: return "unknown_node";
        case ErrorCode::cyclic_graph: return "cyclic_graph";
        case ErrorCode::invalid_pattern: return "invalid_pattern";
        case ErrorCode::degenerate_embedding: return "degenerate_embedding";
        case ErrorCode::unknown_tool: return "unknown_tool";
        case ErrorCode::schema_violation: return "schema_violation";
        case ErrorCode::dangling_handle: return "dangling_handle";
        case ErrorCode::tool_failure: return "tool_failure";
        case ErrorCode::stability: return "stability";
        case ErrorCode::non_convergence: return "non_convergence";
        case ErrorCode::provider_failure: return "provider_failure";
        case ErrorCode::auth_failure: return "auth_failure";
        case ErrorCode::script_exhausted: return "script_exhausted";
        case ErrorCode::session_failure: return "session_failure";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

}  // namespace pdechain
