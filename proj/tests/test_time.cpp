#include <doctest.h>

#include <random>

#include "rescast/time.hpp"

using namespace rescast;

TEST_CASE("civil conversions round trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t days = static_cast<std::int64_t>(rng() % 80000) - 20000;
        const CivilDate d = civil_from_days(days);
        CHECK(days_from_civil(d) == days);
        CHECK(d.month >= 1);
        CHECK(d.month <= 12);
        CHECK(d.day >= 1);
        CHECK(d.day <= days_in_month(d.year, d.month));
    }
}

TEST_CASE("known calendar facts") {
    CHECK(days_from_civil({1970, 1, 1}) == 0);
    CHECK(days_from_civil({2020, 1, 1}) == 18262);
    CHECK(is_leap_year(2020));
    CHECK_FALSE(is_leap_year(2019));
    CHECK_FALSE(is_leap_year(1900));
    CHECK(is_leap_year(2000));
    CHECK(days_in_month(2020, 2) == 29);
    CHECK(days_in_month(2019, 2) == 28);

    const UtcHour t = UtcHour::from_civil({2020, 1, 1}, 0);
    CHECK(t.day_of_week() == 2);  // Wednesday
    CHECK(t.day_of_year() == 1);
    CHECK(UtcHour::from_civil({2020, 12, 31}, 23).day_of_year() == 366);
    CHECK(UtcHour(0).day_of_week() == 3);  // 1970-01-01 was a Thursday
}

TEST_CASE("iso formatting and parsing") {
    const UtcHour t = UtcHour::from_civil({2020, 3, 7}, 14);
    CHECK(to_iso_string(t) == "2020-03-07T14:00:00Z");

    UtcHour parsed;
    bool on_hour = true;
    REQUIRE(parse_iso_hour("2020-03-07T14:00:00Z", parsed, on_hour));
    CHECK(parsed == t);

    CHECK_FALSE(parse_iso_hour("2020-03-07T14:30:00Z", parsed, on_hour));
    CHECK_FALSE(on_hour);

    CHECK_FALSE(parse_iso_hour("garbage", parsed, on_hour));
    CHECK(on_hour);  // malformed, not off-hour
    CHECK_FALSE(parse_iso_hour("2020-13-07T14:00:00Z", parsed, on_hour));
    CHECK_FALSE(parse_iso_hour("2019-02-29T00:00:00Z", parsed, on_hour));
}

TEST_CASE("parse and format round trip over random hours") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const UtcHour t(static_cast<std::int64_t>(rng() % 2000000) - 400000);
        UtcHour back;
        bool on_hour = true;
        REQUIRE(parse_iso_hour(to_iso_string(t), back, on_hour));
        CHECK(back == t);
    }
}
