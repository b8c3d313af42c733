#include "rescast/time.hpp"

#include <charconv>
#include <cstdio>

namespace rescast {

bool is_leap_year(int year) {
    return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

unsigned days_in_month(int year, unsigned month) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[month - 1];
}

// Proleptic Gregorian <-> day-count conversions (era-based integer math).
std::int64_t days_from_civil(const CivilDate& d) {
    const int y = d.year - (d.month <= 2);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{y + (m <= 2), m, d};
}

UtcHour UtcHour::from_civil(const CivilDate& date, unsigned hour_of_day) {
    return UtcHour(days_from_civil(date) * 24 + hour_of_day);
}

namespace {
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && (a < 0) != (b < 0)) --q;
    return q;
}
std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}
}  // namespace

CivilDate UtcHour::date() const { return civil_from_days(floor_div(hours_, 24)); }

unsigned UtcHour::hour_of_day() const { return static_cast<unsigned>(floor_mod(hours_, 24)); }

unsigned UtcHour::day_of_week() const {
    // 1970-01-01 was a Thursday; Monday = 0.
    return static_cast<unsigned>(floor_mod(floor_div(hours_, 24) + 3, 7));
}

unsigned UtcHour::day_of_month() const { return date().day; }

unsigned UtcHour::day_of_year() const {
    const CivilDate d = date();
    return static_cast<unsigned>(days_from_civil(d) - days_from_civil(CivilDate{d.year, 1, 1})) + 1;
}

unsigned UtcHour::month() const { return date().month; }

int UtcHour::year() const { return date().year; }

std::string to_iso_string(UtcHour t) {
    const CivilDate d = t.date();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:00:00Z", d.year, d.month, d.day,
                  t.hour_of_day());
    return buf;
}

std::string to_iso_string(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

namespace {
bool parse_uint(std::string_view s, unsigned& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}
}  // namespace

bool parse_civil_date(std::string_view text, CivilDate& out) {
    // "YYYY-MM-DD" (year may carry a sign).
    if (text.size() < 10) return false;
    std::size_t ypos = (text[0] == '-' || text[0] == '+') ? 1 : 0;
    std::size_t d1 = text.find('-', ypos);
    if (d1 == std::string_view::npos || d1 + 3 >= text.size()) return false;
    std::size_t d2 = text.find('-', d1 + 1);
    if (d2 == std::string_view::npos || d2 + 1 > text.size()) return false;

    int year = 0;
    {
        auto ys = text.substr(0, d1);
        auto [p, ec] = std::from_chars(ys.data(), ys.data() + ys.size(), year);
        if (ec != std::errc{} || p != ys.data() + ys.size()) return false;
    }
    unsigned month = 0, day = 0;
    if (!parse_uint(text.substr(d1 + 1, d2 - d1 - 1), month)) return false;
    if (!parse_uint(text.substr(d2 + 1), day)) return false;
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return false;
    out = CivilDate{year, month, day};
    return true;
}

bool parse_iso_hour(std::string_view text, UtcHour& out, bool& on_hour) {
    on_hour = true;
    // "YYYY-MM-DDTHH:MM:SSZ"
    std::size_t tpos = text.find('T');
    if (tpos == std::string_view::npos) return false;
    CivilDate date;
    if (!parse_civil_date(text.substr(0, tpos), date)) return false;

    std::string_view clock = text.substr(tpos + 1);
    if (clock.size() != 9 || clock[2] != ':' || clock[5] != ':' || clock[8] != 'Z') return false;
    unsigned hh = 0, mm = 0, ss = 0;
    if (!parse_uint(clock.substr(0, 2), hh) || !parse_uint(clock.substr(3, 2), mm) ||
        !parse_uint(clock.substr(6, 2), ss))
        return false;
    if (hh > 23 || mm > 59 || ss > 59) return false;
    if (mm != 0 || ss != 0) {
        on_hour = false;
        return false;
    }
    out = UtcHour::from_civil(date, hh);
    return true;
}

}  // namespace rescast
