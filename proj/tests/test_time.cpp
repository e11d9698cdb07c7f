#include <gtest/gtest.h>

#include "qcity/error.hpp"
#include "qcity/time.hpp"

using namespace qcity;

TEST(Time, ParsesUtcAndOffsets) {
    EXPECT_EQ(to_unix_micros(parse_rfc3339("1970-01-01T00:00:00Z")), 0);
    EXPECT_EQ(to_unix_micros(parse_rfc3339("1970-01-01T00:05:00Z")), 300'000'000);
    EXPECT_EQ(parse_rfc3339("2016-01-04T13:00:00+03:00"), parse_rfc3339("2016-01-04T10:00:00Z"));
    EXPECT_EQ(parse_rfc3339("2016-01-04T09:30:00-00:30"), parse_rfc3339("2016-01-04T10:00:00Z"));
    EXPECT_EQ(parse_rfc3339("2016-01-04 10:00:00z"), parse_rfc3339("2016-01-04T10:00:00Z"));
}

TEST(Time, FractionalSeconds) {
    auto t = parse_rfc3339("1970-01-01T00:00:01.5Z");
    EXPECT_EQ(to_unix_micros(t), 1'500'000);
    EXPECT_EQ(format_rfc3339(t), "1970-01-01T00:00:01.500000Z");
    // digits past microseconds are dropped
    EXPECT_EQ(to_unix_micros(parse_rfc3339("1970-01-01T00:00:00.1234569Z")), 123456);
}

TEST(Time, FormatRoundTrip) {
    for (const char* s : {"2016-01-01T00:00:00Z", "2016-02-29T23:59:59Z", "1999-12-31T12:00:00.000001Z"}) {
        EXPECT_EQ(format_rfc3339(parse_rfc3339(s)), s);
    }
    EXPECT_EQ(format_rfc3339(from_unix_seconds(-1)), "1969-12-31T23:59:59Z");
}

TEST(Time, RejectsMalformed) {
    for (const char* s : {"", "2016-01-01", "2016-13-01T00:00:00Z", "2016-02-30T00:00:00Z", "2016-01-01T24:00:00Z",
             "2016-01-01T00:00:00", "2016-01-01T00:00:00+0300", "2016-01-01T00:00:00Zjunk", "16-01-01T00:00:00Z",
             "2016-01-01T00:00:00.Z"}) {
        try {
            parse_rfc3339(s);
            ADD_FAILURE() << "accepted " << s;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::BadTimestamp) << s;
        }
    }
}
