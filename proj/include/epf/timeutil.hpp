// Hourly UTC time handling. Times are whole hours since the Unix epoch
// (int64), which keeps frame indexing, week tiling and CSV round-trips
// exact. Civil-date conversion uses the days-from-civil algorithm.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "epf/error.hpp"

namespace epf {

using HourStamp = std::int64_t;  // hours since 1970-01-01T00:00:00Z

inline constexpr int kHoursPerDay = 24;
inline constexpr int kHoursPerWeek = 168;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

// days since epoch for a civil date (proleptic Gregorian)
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline HourStamp hour_stamp(int year, int month, int day, int hour) {
  return days_from_civil(year, month, day) * kHoursPerDay + hour;
}

inline int utc_year(HourStamp h) {
  std::int64_t days = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
  return civil_from_days(days).year;
}

// 0 = Monday ... 6 = Sunday
inline int weekday(std::int64_t days) {
  return static_cast<int>(((days % 7) + 7 + 3) % 7);  // epoch day 0 was a Thursday
}

// Most recent Monday 00:00 at or before h.
inline HourStamp week_start(HourStamp h) {
  std::int64_t days = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
  std::int64_t monday = days - weekday(days);
  return monday * kHoursPerDay;
}

// Parses "YYYY-MM-DDTHH:MM:SSZ" (also accepts "YYYY-MM-DD HH:MM:SS" and a
// bare date, which maps to hour 0). Returns false on any malformed field.
inline bool parse_timestamp(const std::string& s, HourStamp& out) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0, tz = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d, &sep, &h, &mi, &sec, &tz);
  if (n >= 7) {
    if (sep != 'T' && sep != ' ') return false;
    if (n == 8 && tz != 'Z') return false;
  } else if (n == 3) {
    h = mi = sec = 0;
  } else {
    return false;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi != 0 || sec != 0)
    return false;
  // reject dates like Feb 30 that pass the field ranges but don't exist
  CivilDate back = civil_from_days(days_from_civil(y, mo, d));
  if (back.year != y || back.month != mo || back.day != d) return false;
  out = hour_stamp(y, mo, d, h);
  return true;
}

inline HourStamp parse_timestamp_or_fail(const std::string& s) {
  HourStamp h;
  if (!parse_timestamp(s, h))
    fail(ErrorClass::io, "unparsable timestamp '" + s + "'");
  return h;
}

inline std::string format_timestamp(HourStamp h) {
  std::int64_t days = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
  int hod = static_cast<int>(h - days * kHoursPerDay);
  CivilDate c = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", c.year, c.month, c.day, hod);
  return buf;
}

inline std::string format_date(std::int64_t days) {
  CivilDate c = civil_from_days(days);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

}  // namespace epf
