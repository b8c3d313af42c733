#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <string_view>

namespace rescast {

/// Calendar date (proleptic Gregorian, UTC).
struct CivilDate {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    auto operator<=>(const CivilDate&) const = default;
};

bool is_leap_year(int year);
unsigned days_in_month(int year, unsigned month);

/// Days since 1970-01-01 for a civil date (negative before the epoch).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

/// A UTC timestamp aligned to a whole hour, stored as hours since
/// 1970-01-01T00:00:00Z. The hourly grid every series in this library
/// lives on is index arithmetic over this type.
class UtcHour {
public:
    UtcHour() = default;
    explicit constexpr UtcHour(std::int64_t hours_since_epoch)
        : hours_(hours_since_epoch) {}

    static UtcHour from_civil(const CivilDate& date, unsigned hour_of_day);

    constexpr std::int64_t hours_since_epoch() const { return hours_; }

    CivilDate date() const;
    unsigned hour_of_day() const;   // 0..23
    unsigned day_of_week() const;   // 0 = Monday .. 6 = Sunday
    unsigned day_of_month() const;  // 1..31
    unsigned day_of_year() const;   // 1..365/366
    unsigned month() const;         // 1..12
    int year() const;

    auto operator<=>(const UtcHour&) const = default;

    UtcHour operator+(std::int64_t hours) const { return UtcHour(hours_ + hours); }
    UtcHour operator-(std::int64_t hours) const { return UtcHour(hours_ - hours); }
    std::int64_t operator-(UtcHour other) const { return hours_ - other.hours_; }
    UtcHour& operator+=(std::int64_t hours) { hours_ += hours; return *this; }

private:
    std::int64_t hours_ = 0;
};

/// Renders as "YYYY-MM-DDTHH:00:00Z".
std::string to_iso_string(UtcHour t);
std::string to_iso_string(const CivilDate& d);

/// Parses "YYYY-MM-DDTHH:MM:SSZ". Returns false on malformed input or a
/// timestamp not aligned to a whole hour; `on_hour` reports which of the
/// two failed so CSV parsing can distinguish ParseError from NonHourly.
bool parse_iso_hour(std::string_view text, UtcHour& out, bool& on_hour);
bool parse_civil_date(std::string_view text, CivilDate& out);

}  // namespace rescast
