#include <doctest.h>

#include <cmath>
#include <random>

#include "rescast/errors.hpp"
#include "rescast/series.hpp"

using namespace rescast;

namespace {
TimeSeries series_of(std::vector<double> values, UtcHour start = UtcHour(0)) {
    TimeSeries s;
    s.start = start;
    s.values = std::move(values);
    s.name = "test";
    s.unit = "MW";
    return s;
}
}  // namespace

TEST_CASE("minmax_fit finds extrema over present values") {
    CHECK(minmax_fit(series_of({0, 5, 10})).min == 0);
    CHECK(minmax_fit(series_of({0, 5, 10})).max == 10);

    const auto p = minmax_fit(series_of({3, kGap, 7}));
    CHECK(p.min == 3);
    CHECK(p.max == 7);
}

TEST_CASE("minmax_fit rejects degenerate input") {
    CHECK_THROWS_AS(minmax_fit(series_of({4, 4, 4})), Error);
    try {
        minmax_fit(series_of({4, 4, 4}));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConstantSeries);
    }
    try {
        minmax_fit(series_of({kGap, kGap}));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptySeries);
    }
}

TEST_CASE("minmax_transform maps the fitted range onto [0, 1]") {
    const ScalerParams p{0, 10};
    auto scaled = minmax_transform(series_of({10, 0, 12, kGap}), p);
    CHECK(scaled.values[0] == 1.0);
    CHECK(scaled.values[1] == 0.0);
    CHECK(scaled.values[2] == doctest::Approx(1.2));  // extrapolation allowed
    CHECK(is_gap(scaled.values[3]));
    CHECK(scaled.unit == "scaled");
}

TEST_CASE("minmax_inverse examples") {
    CHECK(minmax_inverse(series_of({1.0}), {0, 10}).values[0] == 10);
    CHECK(minmax_inverse(series_of({0.5}), {2, 4}).values[0] == doctest::Approx(3));
}

TEST_CASE("transform then inverse is the identity within 1e-12") {
    std::mt19937_64 rng(3);
    std::vector<double> values(500);
    for (auto& v : values) v = 1000.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 200.0;
    const auto s = series_of(values);
    const auto p = minmax_fit(s);
    const auto back = minmax_inverse(minmax_transform(s, p), p);
    for (std::size_t i = 0; i < values.size(); ++i)
        CHECK(std::abs(back.values[i] - values[i]) <=
              1e-12 * std::max(1.0, std::abs(values[i])));
}

TEST_CASE("gap-free transform attains 0 and 1 exactly on the fitted span") {
    std::mt19937_64 rng(5);
    std::vector<double> values(64);
    for (auto& v : values) v = static_cast<double>(rng() % 1000);
    values[10] = -3;
    values[20] = 2000;
    const auto s = series_of(values);
    const auto scaled = minmax_transform(s, minmax_fit(s));
    double lo = 1e300, hi = -1e300;
    for (double v : scaled.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("split covers the paper's chronology") {
    // Four years 2017-2020, train on the first three.
    const UtcHour start = UtcHour::from_civil({2017, 1, 1}, 0);
    const std::size_t four_years = 24 * (365 * 3 + 366);
    TimeSeries s = series_of(std::vector<double>(four_years, 1.0), start);

    const SplitSpec spec{UtcHour::from_civil({2020, 1, 1}, 0),
                         UtcHour::from_civil({2021, 1, 1}, 0)};
    const auto [train, test] = split(s, spec);
    CHECK(train.size() == 24u * 365 * 3);
    CHECK(test.size() == 24u * 366);
    CHECK(train.start == start);
    CHECK(test.start == spec.train_end);
    CHECK(train.size() + test.size() == s.size());
}

TEST_CASE("split edge cases") {
    TimeSeries s = series_of(std::vector<double>(48, 1.0));
    CHECK_THROWS_AS(split(s, SplitSpec{UtcHour(0), UtcHour(10)}), Error);  // EmptyTrain
    CHECK_THROWS_AS(split(s, SplitSpec{UtcHour(10), UtcHour(100)}), Error);  // OutOfRange

    const auto [train, test] = split(s, SplitSpec{UtcHour(10), UtcHour(11)});
    CHECK(test.size() == 1);
    CHECK(train.size() == 10);
}

TEST_CASE("split preserves total length with an excluded tail") {
    TimeSeries s = series_of(std::vector<double>(100, 1.0));
    const auto [train, test] = split(s, SplitSpec{UtcHour(60), UtcHour(80)});
    const std::size_t excluded = s.size() - train.size() - test.size();
    CHECK(excluded == 20);
}
