#include "crs/error.hpp"

namespace crs {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InputTooLarge: return "InputTooLarge";
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateRuleId: return "DuplicateRuleId";
        case ErrorCode::InvalidPattern: return "InvalidPattern";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
        case ErrorCode::RemoteMalformed: return "RemoteMalformed";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::SingleClassDataset: return "SingleClassDataset";
        case ErrorCode::ClassMissing: return "ClassMissing";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptModel: return "CorruptModel";
        case ErrorCode::RewriterUnavailable: return "RewriterUnavailable";
        case ErrorCode::RewriterUnsafe: return "RewriterUnsafe";
        case ErrorCode::NoOffenceFound: return "NoOffenceFound";
        case ErrorCode::UnsafeThesaurus: return "UnsafeThesaurus";
        case ErrorCode::EngineNotReady: return "EngineNotReady";
        case ErrorCode::UnreadableSource: return "UnreadableSource";
        case ErrorCode::UnknownFormat: return "UnknownFormat";
        case ErrorCode::InvalidFraction: return "InvalidFraction";
        case ErrorCode::InvalidCounts: return "InvalidCounts";
        case ErrorCode::EmptyExport: return "EmptyExport";
        case ErrorCode::IdMismatch: return "IdMismatch";
        case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    }
    return "Unknown";
}

}  // namespace crs
