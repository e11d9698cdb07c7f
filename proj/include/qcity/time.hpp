#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace qcity {

// Absolute UTC instant with microsecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

// Parses an RFC 3339 date-time ("2016-01-04T10:00:00Z", "...+03:00",
// optional fractional seconds). Non-Z offsets are folded into UTC.
// Throws Error(BadTimestamp).
Timestamp parse_rfc3339(std::string_view text);

// Canonical form: "YYYY-MM-DDTHH:MM:SSZ", with ".ffffff" when the instant
// has a sub-second part.
std::string format_rfc3339(Timestamp ts);

inline std::int64_t to_unix_micros(Timestamp ts) {
    return ts.time_since_epoch().count();
}

inline Timestamp from_unix_seconds(std::int64_t s) {
    return Timestamp(std::chrono::seconds(s));
}

} // namespace qcity
