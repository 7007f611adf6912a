#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crs {

enum class ErrorCode {
    InputTooLarge,
    InvalidEncoding,
    ParseError,
    DuplicateRuleId,
    InvalidPattern,
    InvalidConfig,
    RemoteUnavailable,
    RemoteMalformed,
    EmptyCorpus,
    EmptyInput,
    SizeMismatch,
    SingleClassDataset,
    ClassMissing,
    DimensionMismatch,
    EmptyDataset,
    VersionMismatch,
    CorruptModel,
    RewriterUnavailable,
    RewriterUnsafe,
    NoOffenceFound,
    UnsafeThesaurus,
    EngineNotReady,
    UnreadableSource,
    UnknownFormat,
    InvalidFraction,
    InvalidCounts,
    EmptyExport,
    IdMismatch,
    DegenerateMarginals,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// ParseError carrying the 1-based line of the offending input (0 when the
/// problem is structural rather than tied to a line).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace crs
