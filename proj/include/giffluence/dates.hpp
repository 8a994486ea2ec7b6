#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace giffluence {

using Date = std::chrono::sys_days;
/// UTC instant with millisecond resolution.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses `YYYY-MM-DD`; nullopt on malformed or invalid calendar dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses `YYYY-MM` to the first day of that month.
std::optional<Date> parse_month(std::string_view text);

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM[:SS[.fff]](Z|±HH[:MM])`. An offset is required.
std::optional<Instant> parse_instant(std::string_view text);
/// Canonical UTC form, `YYYY-MM-DDTHH:MM:SS.mmmZ`.
std::string format_instant(Instant t);

/// 0 = Monday .. 6 = Sunday.
int weekday_index(Date d);
/// 1..12.
int month_of(Date d);
/// Monday of the calendar week containing d.
Date week_start(Date d);
Date first_of_month(Date d);

}  // namespace giffluence
