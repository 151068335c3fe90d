#include "lifeforge/timeutil.hpp"

#include <cstdio>
#include <cstring>

namespace lifeforge {

std::string format_date(Day d) {
    CivilDate c = civil_from_days(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

std::string format_timestamp(Timestamp t) {
    CivilDate c = civil_from_days(day_of(t));
    int s = second_of_day(t);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day,
                  s / 3600, (s / 60) % 60, s % 60);
    return buf;
}

std::string format_month(int year, int month) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::string format_interval(Timestamp a, Timestamp b) {
    return format_timestamp(a) + " to " + format_timestamp(b);
}

std::string format_slash_time(Timestamp t) {
    CivilDate c = civil_from_days(day_of(t));
    int s = second_of_day(t);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d/%02d/%02d/%02d:%02d:%02d", c.year, c.month, c.day,
                  s / 3600, (s / 60) % 60, s % 60);
    return buf;
}

std::string format_slash_minute(Timestamp t) {
    CivilDate c = civil_from_days(day_of(t));
    int s = second_of_day(t);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d/%02d/%02d %02d:%02d", c.year, c.month, c.day,
                  s / 3600, (s / 60) % 60);
    return buf;
}

std::string format_clock(int seconds_of_day) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", seconds_of_day / 3600,
                  (seconds_of_day / 60) % 60, seconds_of_day % 60);
    return buf;
}

std::optional<Day> parse_date(const std::string& s) {
    int y, m, d;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::optional<Timestamp> parse_timestamp(const std::string& s) {
    int y, mo, d, h, mi, sec;
    if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &sec) != 6)
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo)) return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 59) return std::nullopt;
    return make_timestamp(y, mo, d, h, mi, sec);
}

std::optional<std::pair<Timestamp, Timestamp>> parse_interval(const std::string& s) {
    auto pos = s.find(" to ");
    if (pos == std::string::npos) return std::nullopt;
    auto a = parse_timestamp(s.substr(0, pos));
    auto b = parse_timestamp(s.substr(pos + 4));
    if (!a || !b) return std::nullopt;
    return std::make_pair(*a, *b);
}

std::optional<std::pair<int, int>> parse_month(const std::string& s) {
    int y, m;
    if (std::sscanf(s.c_str(), "%d-%d", &y, &m) != 2) return std::nullopt;
    if (m < 1 || m > 12) return std::nullopt;
    return std::make_pair(y, m);
}

}  // namespace lifeforge
