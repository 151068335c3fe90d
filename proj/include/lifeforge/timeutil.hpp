#pragma once
// Naive local-time model. Timestamps are seconds since 1970-01-01 00:00:00
// with no timezone; the wire format is always "YYYY-MM-DD HH:MM:SS".

#include <cstdint>
#include <optional>
#include <string>

namespace lifeforge {

using Timestamp = int64_t;  // seconds
using Day = int32_t;        // days since 1970-01-01

inline constexpr int64_t kSecondsPerDay = 86400;

// Howard Hinnant's civil-date algorithms.
constexpr Day days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;
};

constexpr CivilDate civil_from_days(Day z) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

constexpr Timestamp make_timestamp(int y, int mo, int d, int h = 0, int mi = 0, int s = 0) {
    return static_cast<Timestamp>(days_from_civil(y, mo, d)) * kSecondsPerDay +
           h * 3600 + mi * 60 + s;
}

constexpr Day day_of(Timestamp t) {
    return static_cast<Day>(t >= 0 ? t / kSecondsPerDay
                                   : (t - kSecondsPerDay + 1) / kSecondsPerDay);
}

constexpr int second_of_day(Timestamp t) {
    return static_cast<int>(t - static_cast<Timestamp>(day_of(t)) * kSecondsPerDay);
}

// 0 = Monday ... 6 = Sunday.
constexpr int weekday_of(Day d) { return static_cast<int>(((d % 7) + 10) % 7); }

constexpr int days_in_month(int y, int m) {
    constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return lengths[m - 1];
}

std::string format_date(Day d);                       // "2025-01-31"
std::string format_timestamp(Timestamp t);            // "2025-01-31 08:15:00"
std::string format_month(int year, int month);        // "2025-01"
std::string format_interval(Timestamp a, Timestamp b);  // "A to B"
std::string format_slash_time(Timestamp t);           // "2025/01/31/08:15:00"
std::string format_slash_minute(Timestamp t);         // "2025/01/31 08:15"
std::string format_clock(int seconds_of_day);         // "08:15:00"

std::optional<Day> parse_date(const std::string& s);
std::optional<Timestamp> parse_timestamp(const std::string& s);
std::optional<std::pair<Timestamp, Timestamp>> parse_interval(const std::string& s);
// "2025-07" -> (2025, 7)
std::optional<std::pair<int, int>> parse_month(const std::string& s);

// Month ordinal helpers: months since year 0 for cross-year arithmetic.
constexpr int month_index(int year, int month) { return year * 12 + (month - 1); }

}  // namespace lifeforge
