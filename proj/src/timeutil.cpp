#include "portnet/timeutil.hpp"

#include <chrono>
#include <cstdio>

#include "portnet/error.hpp"

namespace portnet {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') throw InvalidInput("expected digit in '" + std::string(s) + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

DayIndex civil_to_days(int y, int m, int d, std::string_view text) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw InvalidInput("invalid calendar date '" + std::string(text) + "'");
    return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

Timestamp parse_iso8601(std::string_view s) {
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != 'Z') {
        throw InvalidInput("timestamp must be YYYY-MM-DDTHH:MM:SSZ, got '" + std::string(s) + "'");
    }
    const int hh = digits(s, 11, 2), mm = digits(s, 14, 2), ss = digits(s, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) throw InvalidInput("invalid time of day '" + std::string(s) + "'");
    const DayIndex d = civil_to_days(digits(s, 0, 4), digits(s, 5, 2), digits(s, 8, 2), s);
    return d * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

DayIndex day_of(Timestamp t) {
    DayIndex d = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) --d;
    return d;
}

Timestamp day_start(DayIndex d) { return d * kSecondsPerDay; }

std::string format_date(DayIndex d) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{d}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_iso8601(Timestamp t) {
    const DayIndex d = day_of(t);
    const auto sod = t - day_start(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
    return format_date(d) + buf;
}

DayIndex parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw InvalidInput("date must be YYYY-MM-DD, got '" + std::string(s) + "'");
    return civil_to_days(digits(s, 0, 4), digits(s, 5, 2), digits(s, 8, 2), s);
}

}  // namespace portnet
