#include "qcity/error.hpp"

namespace qcity {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadCoordinate: return "BadCoordinate";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::BadPayload: return "BadPayload";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::DuplicateZoneId: return "DuplicateZoneId";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::SelfIntersectingPolygon: return "SelfIntersectingPolygon";
    case ErrorCode::BadZoneFile: return "BadZoneFile";
    case ErrorCode::PreEpochTimestamp: return "PreEpochTimestamp";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnreadableLine: return "UnreadableLine";
    case ErrorCode::ConflictingDuplicate: return "ConflictingDuplicate";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownZone: return "UnknownZone";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InconsistentStore: return "InconsistentStore";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::BadLexicon: return "BadLexicon";
    case ErrorCode::BadGazetteer: return "BadGazetteer";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace qcity
