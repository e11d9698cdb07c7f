#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcity {

enum class ErrorCode {
    MissingField,
    BadCoordinate,
    BadTimestamp,
    BadPayload,
    EmptyPartition,
    DuplicateZoneId,
    DegeneratePolygon,
    SelfIntersectingPolygon,
    BadZoneFile,
    PreEpochTimestamp,
    FileNotFound,
    UnreadableLine,
    ConflictingDuplicate,
    EmptyCorpus,
    UnknownZone,
    SeriesTooShort,
    InsufficientHistory,
    IoError,
    InconsistentStore,
    VersionMismatch,
    CorruptRecord,
    BadLexicon,
    BadGazetteer,
    InvalidArgument,
};

// Stable name used in reports and error bodies, e.g. "BadCoordinate".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail),
          m_code(code), m_detail(detail) {}

    ErrorCode code() const noexcept { return m_code; }
    const std::string& detail() const noexcept { return m_detail; }

private:
    ErrorCode m_code;
    std::string m_detail;
};

} // namespace qcity
