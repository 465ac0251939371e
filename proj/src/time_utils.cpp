#include "floodlens/time_utils.hpp"

#include <cstdio>
#include <cstdlib>

namespace floodlens {

std::int64_t TimeWindow::distance_secs(UtcTime t) const {
    if (t < start) return start.secs - t.secs;
    if (t > end) return t.secs - end.secs;
    return 0;
}

// Howard Hinnant's civil date algorithms (public domain).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

std::int64_t day_of(UtcTime t) {
    // floor division so pre-1970 instants land on the right day
    std::int64_t d = t.secs / 86400;
    if (t.secs % 86400 < 0) --d;
    return d;
}

UtcTime utc_from_ymd(int year, unsigned month, unsigned day) {
    return UtcTime{days_from_civil(year, month, day) * 86400};
}

namespace {

bool parse_uint(std::string_view s, size_t pos, size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

} // namespace

std::optional<UtcTime> parse_iso8601(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);

    unsigned y = 0, mo = 0, d = 0;
    if (!parse_uint(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
        !parse_uint(s, 5, 2, mo) || !parse_uint(s, 8, 2, d))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;

    unsigned hh = 0, mm = 0, ss = 0;
    if (s.size() > 10) {
        if ((s[10] != 'T' && s[10] != ' ') || s.size() < 19 || s[13] != ':' || s[16] != ':' ||
            !parse_uint(s, 11, 2, hh) || !parse_uint(s, 14, 2, mm) || !parse_uint(s, 17, 2, ss))
            return std::nullopt;
        if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
        size_t pos = 19;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
        if (pos < s.size()) {
            if (s[pos] != 'Z' || pos + 1 != s.size()) return std::nullopt;
        }
    }
    std::int64_t secs = days_from_civil(static_cast<int>(y), mo, d) * 86400 +
                        static_cast<std::int64_t>(hh) * 3600 + mm * 60 + ss;
    return UtcTime{secs};
}

std::string format_iso8601(UtcTime t) {
    int y;
    unsigned mo, d;
    civil_from_days(day_of(t), y, mo, d);
    std::int64_t rem = t.secs - day_of(t) * 86400;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::string format_date(UtcTime t) {
    int y;
    unsigned mo, d;
    civil_from_days(day_of(t), y, mo, d);
    char buf[12];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mo, d);
    return buf;
}

std::string format_compact(UtcTime t) {
    return (t.secs % 86400 == 0) ? format_date(t) : format_iso8601(t);
}

} // namespace floodlens
