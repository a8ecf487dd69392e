#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace histprep {

/// Signed span of time with microsecond resolution.
struct Duration {
  std::int64_t us = 0;

  constexpr auto operator<=>(const Duration&) const = default;

  constexpr Duration operator+(Duration o) const { return {us + o.us}; }
  constexpr Duration operator-(Duration o) const { return {us - o.us}; }
  constexpr Duration operator-() const { return {-us}; }
  constexpr Duration operator*(std::int64_t k) const { return {us * k}; }
  constexpr std::int64_t operator/(Duration o) const { return us / o.us; }
  constexpr Duration operator/(std::int64_t k) const { return {us / k}; }

  constexpr double seconds() const { return static_cast<double>(us) / 1e6; }
};

constexpr Duration microseconds(std::int64_t n) { return {n}; }
constexpr Duration milliseconds(std::int64_t n) { return {n * 1000}; }
constexpr Duration seconds(std::int64_t n) { return {n * 1000000}; }
constexpr Duration minutes(std::int64_t n) { return {n * 60000000}; }
constexpr Duration hours(std::int64_t n) { return {n * 3600000000LL}; }
constexpr Duration days(std::int64_t n) { return {n * 86400000000LL}; }

/// Instant in time: integer microseconds since the Unix epoch, UTC.
/// Integer arithmetic keeps gridding exact; covers years 1970-2100 and far
/// beyond.
struct Timestamp {
  std::int64_t us = 0;

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(Duration d) const { return {us + d.us}; }
  constexpr Timestamp operator-(Duration d) const { return {us - d.us}; }
  constexpr Duration operator-(Timestamp o) const { return {us - o.us}; }
};

/// Parse an ISO-8601 timestamp with an explicit UTC offset, e.g.
/// `2021-03-04T12:00:00.000000Z` or `2021-03-04 13:30:00+01:30`.
/// Fractional seconds are optional (1..6 digits). Throws ParseError.
Timestamp parse_iso8601(std::string_view text);

/// Format as `YYYY-MM-DDTHH:MM:SS.ffffffZ` (always UTC, 6-digit fraction).
std::string format_iso8601(Timestamp t);

/// Parse a duration literal: integer or decimal count plus one of the
/// suffixes us, ms, s, m, h, d (e.g. "5s", "1.5h", "-90s"). Throws ParseError.
Duration parse_duration(std::string_view text);

/// Compact literal form, exact: picks the largest suffix that divides evenly.
std::string format_duration(Duration d);

} // namespace histprep
