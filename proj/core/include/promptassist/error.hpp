#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promptassist {

enum class ErrorCode {
    // prompt_templates
    ArityMismatch,
    EmptyInput,
    EmptyList,
    InvalidTemplate,
    // completion_parser
    NoSuggestions,
    // llm_client
    BackendUnavailable,
    Timeout,
    Cancelled,
    MissingFixture,
    RecordingDisabled,
    InvalidRequest,
    // suggestion_service
    InvalidQuery,
    // wizard
    WrongStep,
    SkipNotAllowed,
    EmptyPayload,
    NoScene,
    WordNotFound,
    EmptyPrompt,
    // persistence
    NotFound,
    SchemaMismatch,
    CorruptRecord,
    StorageFull,
    SerializationFailure,
    // configuration and I/O
    InvalidConfig,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries a stable code; the message is
/// for logs and developers, not end users (see api::map_error for those).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace promptassist
