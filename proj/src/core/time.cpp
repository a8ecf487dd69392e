#include "histprep/core/time.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "histprep/core/errors.hpp"

namespace histprep {

namespace {

// Days between 1970-01-01 and y-m-d in the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month, day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr std::array<unsigned, 12> k = {31, 28, 31, 30, 31, 30,
                                                 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return k[m - 1];
}

// Parses exactly n digits starting at pos; advances pos.
bool take_digits(std::string_view s, size_t& pos, int n, std::int64_t& out) {
  if (pos + n > s.size()) return false;
  std::int64_t v = 0;
  for (int i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += n;
  out = v;
  return true;
}

[[noreturn]] void bad_timestamp(std::string_view text, const char* why) {
  throw ParseError("invalid timestamp '" + std::string(text) + "': " + why);
}

} // namespace

Timestamp parse_iso8601(std::string_view text) {
  size_t pos = 0;
  std::int64_t year, month, day, hour, minute, second;
  if (!take_digits(text, pos, 4, year)) bad_timestamp(text, "expected YYYY");
  if (pos >= text.size() || text[pos++] != '-') bad_timestamp(text, "expected '-'");
  if (!take_digits(text, pos, 2, month)) bad_timestamp(text, "expected MM");
  if (pos >= text.size() || text[pos++] != '-') bad_timestamp(text, "expected '-'");
  if (!take_digits(text, pos, 2, day)) bad_timestamp(text, "expected DD");
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != ' '))
    bad_timestamp(text, "expected 'T' separator");
  ++pos;
  if (!take_digits(text, pos, 2, hour)) bad_timestamp(text, "expected HH");
  if (pos >= text.size() || text[pos++] != ':') bad_timestamp(text, "expected ':'");
  if (!take_digits(text, pos, 2, minute)) bad_timestamp(text, "expected MM");
  if (pos >= text.size() || text[pos++] != ':') bad_timestamp(text, "expected ':'");
  if (!take_digits(text, pos, 2, second)) bad_timestamp(text, "expected SS");

  std::int64_t micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int n = 0;
    std::int64_t frac = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (n < 6) frac = frac * 10 + (text[pos] - '0');
      ++n;
      ++pos;
    }
    if (n == 0) bad_timestamp(text, "empty fractional seconds");
    if (n > 6) bad_timestamp(text, "more than microsecond precision");
    for (int i = n; i < 6; ++i) frac *= 10;
    micros = frac;
  }

  if (pos >= text.size())
    bad_timestamp(text, "missing UTC offset (use Z or +HH:MM)");
  std::int64_t offset_us = 0;
  char z = text[pos];
  if (z == 'Z' || z == 'z') {
    ++pos;
  } else if (z == '+' || z == '-') {
    ++pos;
    std::int64_t oh, om = 0;
    if (!take_digits(text, pos, 2, oh)) bad_timestamp(text, "expected offset HH");
    if (pos < text.size() && text[pos] == ':') ++pos;
    if (pos < text.size()) {
      if (!take_digits(text, pos, 2, om)) bad_timestamp(text, "expected offset MM");
    }
    if (oh > 23 || om > 59) bad_timestamp(text, "offset out of range");
    offset_us = (oh * 3600 + om * 60) * 1000000;
    if (z == '-') offset_us = -offset_us;
  } else {
    bad_timestamp(text, "missing UTC offset (use Z or +HH:MM)");
  }
  if (pos != text.size()) bad_timestamp(text, "trailing characters");

  if (month < 1 || month > 12) bad_timestamp(text, "month out of range");
  if (day < 1 || day > days_in_month(year, static_cast<unsigned>(month)))
    bad_timestamp(text, "day out of range");
  if (hour > 23 || minute > 59 || second > 59)
    bad_timestamp(text, "time of day out of range");

  const std::int64_t d =
      days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const std::int64_t local =
      ((d * 24 + hour) * 3600 + minute * 60 + second) * 1000000 + micros;
  return Timestamp{local - offset_us};
}

std::string format_iso8601(Timestamp t) {
  std::int64_t us = t.us % 1000000;
  std::int64_t sec = t.us / 1000000;
  if (us < 0) {
    us += 1000000;
    sec -= 1;
  }
  std::int64_t d = sec / 86400;
  std::int64_t tod = sec % 86400;
  if (tod < 0) {
    tod += 86400;
    d -= 1;
  }
  const Civil c = civil_from_days(d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ",
                static_cast<long long>(c.year), c.month, c.day,
                static_cast<long long>(tod / 3600),
                static_cast<long long>((tod / 60) % 60),
                static_cast<long long>(tod % 60), static_cast<long long>(us));
  return buf;
}

Duration parse_duration(std::string_view text) {
  if (text.empty()) throw ParseError("empty duration");
  size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  size_t digits_start = i;
  bool seen_dot = false;
  while (i < text.size() &&
         ((text[i] >= '0' && text[i] <= '9') || (text[i] == '.' && !seen_dot))) {
    if (text[i] == '.') seen_dot = true;
    ++i;
  }
  if (i == digits_start)
    throw ParseError("invalid duration '" + std::string(text) + "'");
  std::string_view suffix = text.substr(i);
  std::int64_t scale;
  if (suffix == "us") scale = 1;
  else if (suffix == "ms") scale = 1000;
  else if (suffix == "s") scale = 1000000;
  else if (suffix == "m") scale = 60000000;
  else if (suffix == "h") scale = 3600000000LL;
  else if (suffix == "d") scale = 86400000000LL;
  else
    throw ParseError("invalid duration '" + std::string(text) +
                     "': expected suffix us|ms|s|m|h|d");
  const std::string num(text.substr(0, i));
  if (seen_dot) {
    char* end = nullptr;
    const double v = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size())
      throw ParseError("invalid duration '" + std::string(text) + "'");
    return Duration{static_cast<std::int64_t>(std::llround(v * static_cast<double>(scale)))};
  }
  char* end = nullptr;
  const long long v = std::strtoll(num.c_str(), &end, 10);
  if (end != num.c_str() + num.size())
    throw ParseError("invalid duration '" + std::string(text) + "'");
  return Duration{v * scale};
}

std::string format_duration(Duration d) {
  struct Unit {
    std::int64_t scale;
    const char* suffix;
  };
  static constexpr std::array<Unit, 6> units = {{{86400000000LL, "d"},
                                                 {3600000000LL, "h"},
                                                 {60000000, "m"},
                                                 {1000000, "s"},
                                                 {1000, "ms"},
                                                 {1, "us"}}};
  if (d.us == 0) return "0s";
  for (const auto& u : units) {
    if (d.us % u.scale == 0)
      return std::to_string(d.us / u.scale) + u.suffix;
  }
  return std::to_string(d.us) + "us";
}

} // namespace histprep
