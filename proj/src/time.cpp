#include "qcity/time.hpp"

#include <cstdio>

#include "qcity/error.hpp"

namespace qcity {

namespace {

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw Error(ErrorCode::BadTimestamp, std::string(why) + " in '" + std::string(text) + "'");
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
    if (pos + count > text.size()) {
        bad(text, "truncated field");
    }
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        char c = text[pos + i];
        if (!is_digit(c)) {
            bad(text, "expected digit");
        }
        value = value * 10 + (c - '0');
    }
    pos += count;
    return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
    if (pos >= text.size() || text[pos] != c) {
        bad(text, "unexpected separator");
    }
    ++pos;
}

} // namespace

Timestamp parse_rfc3339(std::string_view text) {
    using namespace std::chrono;
    std::size_t pos = 0;
    int y = read_digits(text, pos, 4);
    expect(text, pos, '-');
    int mo = read_digits(text, pos, 2);
    expect(text, pos, '-');
    int d = read_digits(text, pos, 2);
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
        bad(text, "missing date/time separator");
    }
    ++pos;
    int hh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    int mm = read_digits(text, pos, 2);
    expect(text, pos, ':');
    int ss = read_digits(text, pos, 2);

    std::int64_t micros = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        while (pos < text.size() && is_digit(text[pos])) {
            if (digits < 6) {
                micros = micros * 10 + (text[pos] - '0');
            }
            ++digits;
            ++pos;
        }
        if (digits == 0) {
            bad(text, "empty fraction");
        }
        for (std::size_t i = digits; i < 6; ++i) {
            micros *= 10;
        }
    }

    std::int64_t offset_s = 0;
    if (pos >= text.size()) {
        bad(text, "missing UTC offset");
    }
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        int sign = text[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = read_digits(text, pos, 2);
        expect(text, pos, ':');
        int om = read_digits(text, pos, 2);
        if (oh > 23 || om > 59) {
            bad(text, "offset out of range");
        }
        offset_s = sign * (oh * 3600 + om * 60);
    } else {
        bad(text, "bad UTC offset");
    }
    if (pos != text.size()) {
        bad(text, "trailing characters");
    }

    year_month_day ymd{year(y), month(static_cast<unsigned>(mo)), day(static_cast<unsigned>(d))};
    if (!ymd.ok()) {
        bad(text, "invalid calendar date");
    }
    if (hh > 23 || mm > 59 || ss > 59) {
        bad(text, "time of day out of range");
    }
    auto local = sys_days(ymd) + hours(hh) + minutes(mm) + seconds(ss);
    return time_point_cast<microseconds>(local) + microseconds(micros) - seconds(offset_s);
}

std::string format_rfc3339(Timestamp ts) {
    using namespace std::chrono;
    auto day_point = floor<days>(ts);
    year_month_day ymd{day_point};
    auto tod = ts - day_point;
    auto h = duration_cast<hours>(tod);
    tod -= h;
    auto m = duration_cast<minutes>(tod);
    tod -= m;
    auto s = duration_cast<seconds>(tod);
    tod -= s;
    long long frac = tod.count();

    char buf[48];
    if (frac == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02lldZ",
            static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
            static_cast<int>(m.count()), static_cast<long long>(s.count()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02lld.%06lldZ",
            static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
            static_cast<int>(m.count()), static_cast<long long>(s.count()), frac);
    }
    return buf;
}

} // namespace qcity
