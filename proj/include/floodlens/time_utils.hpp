#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace floodlens {

// UTC instant with second resolution. All timestamps in the engine are UTC;
// wall-clock zones never enter the pipeline.
struct UtcTime {
    std::int64_t secs = 0; // seconds since 1970-01-01T00:00:00Z

    friend auto operator<=>(const UtcTime&, const UtcTime&) = default;
};

struct TimeWindow {
    UtcTime start;
    UtcTime end;

    bool contains(UtcTime t) const { return start <= t && t <= end; }
    // 0 inside the window, otherwise distance in seconds to the nearest edge.
    std::int64_t distance_secs(UtcTime t) const;
};

std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

// Civil day index (days since epoch). Used for date-granularity comparisons.
std::int64_t day_of(UtcTime t);

UtcTime utc_from_ymd(int year, unsigned month, unsigned day);

// Accepts "YYYY-MM-DD" and "YYYY-MM-DDTHH:MM:SS[Z]" (space also tolerated as
// the date/time separator; fractional seconds ignored).
std::optional<UtcTime> parse_iso8601(std::string_view s);

std::string format_iso8601(UtcTime t); // always YYYY-MM-DDTHH:MM:SSZ
std::string format_date(UtcTime t);    // YYYY-MM-DD
// Date when at midnight, full ISO otherwise.
std::string format_compact(UtcTime t);

} // namespace floodlens
