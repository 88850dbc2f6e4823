#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace portnet {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
/// Days since 1970-01-01, UTC calendar.
using DayIndex = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

/// Parses exactly `YYYY-MM-DDTHH:MM:SSZ`. Throws InvalidInput on anything else.
Timestamp parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp t);

DayIndex day_of(Timestamp t);
Timestamp day_start(DayIndex d);
std::string format_date(DayIndex d);
DayIndex parse_date(std::string_view text);

}  // namespace portnet
