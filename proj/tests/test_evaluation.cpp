#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rescast/errors.hpp"
#include "rescast/evaluation.hpp"

using namespace rescast;

namespace {

ForecastRun run_from_errors(const std::vector<double>& errors) {
    ForecastRun run;
    run.model_id = "test";
    run.predictions.start = UtcHour(0);
    run.actuals.start = UtcHour(0);
    run.predictions.values.assign(errors.size(), 0.0);
    run.actuals.values.assign(errors.size(), 0.0);
    for (std::size_t i = 0; i < errors.size(); ++i) run.predictions.values[i] = errors[i];
    return run;
}

ForecastRun run_of(std::vector<double> actual, std::vector<double> predicted) {
    ForecastRun run;
    run.model_id = "test";
    run.predictions.start = UtcHour(0);
    run.actuals.start = UtcHour(0);
    run.actuals.values = std::move(actual);
    run.predictions.values = std::move(predicted);
    return run;
}

}  // namespace

TEST_CASE("mae basics") {
    CHECK(mae(run_from_errors({0.1, 0.3})) == doctest::Approx(0.2));
    CHECK(mae(run_from_errors({0.0, 0.0, 0.0})) == 0.0);
    CHECK_THROWS_AS(mae(run_from_errors({})), Error);
}

TEST_CASE("rmse basics") {
    CHECK(rmse(run_from_errors({3.0, 4.0})) == doctest::Approx(std::sqrt(12.5)));
    CHECK(rmse(run_from_errors({0.25, -0.25, 0.25})) == doctest::Approx(0.25));
}

TEST_CASE("error intervals example and boundaries") {
    const auto pcts = error_intervals(run_from_errors({0.05, 0.12, 0.20, 0.08}));
    CHECK(pcts.under_10 == doctest::Approx(50.0));
    CHECK(pcts.between_10_15 == doctest::Approx(25.0));
    CHECK(pcts.over_15 == doctest::Approx(25.0));

    const auto zero = error_intervals(run_from_errors({0.0, 0.0}));
    CHECK(zero.under_10 == 100.0);
    CHECK(zero.over_15 == 0.0);

    // Both boundary values land in the closed middle bucket.
    const auto edges = error_intervals(run_from_errors({0.10, 0.15}));
    CHECK(edges.between_10_15 == doctest::Approx(100.0));
}

TEST_CASE("interval percentages always sum to 100") {
    std::mt19937_64 rng(167);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> errors(1 + rng() % 50);
        for (auto& e : errors) e = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 0.4;
        const auto pcts = error_intervals(run_from_errors(errors));
        CHECK(std::abs(pcts.under_10 + pcts.between_10_15 + pcts.over_15 - 100.0) < 1e-9);
    }
}

TEST_CASE("rmse dominates mae") {
    std::mt19937_64 rng(173);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> errors(2 + rng() % 40);
        for (auto& e : errors) e = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        const auto run = run_from_errors(errors);
        CHECK(rmse(run) >= mae(run) - 1e-12);
    }
    // Equality iff all absolute errors are equal.
    const auto equal = run_from_errors({0.2, -0.2, 0.2});
    CHECK(rmse(equal) == doctest::Approx(mae(equal)));
}

TEST_CASE("metrics ignore hours with missing data and are permutation invariant") {
    auto run = run_of({1.0, kGap, 3.0, 4.0}, {1.5, 2.0, kGap, 4.25});
    CHECK(valid_hours(run) == 2);
    CHECK(mae(run) == doctest::Approx((0.5 + 0.25) / 2));

    std::mt19937_64 rng(179);
    std::vector<double> a(64), p(64);
    for (std::size_t i = 0; i < 64; ++i) {
        a[i] = static_cast<double>(rng() % 100) / 50.0;
        p[i] = static_cast<double>(rng() % 100) / 50.0;
    }
    const auto before = evaluate(run_of(a, p));
    std::vector<std::size_t> perm(64);
    for (std::size_t i = 0; i < 64; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> a2(64), p2(64);
    for (std::size_t i = 0; i < 64; ++i) {
        a2[i] = a[perm[i]];
        p2[i] = p[perm[i]];
    }
    const auto after = evaluate(run_of(a2, p2));
    CHECK(after.mae == doctest::Approx(before.mae).epsilon(1e-12));
    CHECK(after.rmse == doctest::Approx(before.rmse).epsilon(1e-12));
    CHECK(after.intervals.under_10 == before.intervals.under_10);
}

TEST_CASE("heatmap of a constant series is constant with full shape") {
    TimeSeries s;
    s.start = UtcHour::from_civil({2017, 1, 1}, 0);
    s.values.assign(24 * 365, 0.42);
    const HeatmapMatrix m = heatmap(s);
    for (const auto& row : m.cells)
        for (double v : row) CHECK(v == doctest::Approx(0.42));
}

TEST_CASE("heatmap cells with no observations are absent") {
    TimeSeries s;
    s.start = UtcHour::from_civil({2020, 1, 1}, 0);
    s.values.assign(24 * 31, 1.0);  // January only
    const HeatmapMatrix m = heatmap(s);
    CHECK(m.cells[0][12] == 1.0);
    CHECK(is_gap(m.cells[5][12]));
}

TEST_CASE("heatmap equals a brute-force group-by") {
    std::mt19937_64 rng(181);
    TimeSeries s;
    s.start = UtcHour::from_civil({2019, 3, 7}, 5);
    s.values.resize(1000);
    for (auto& v : s.values) {
        v = static_cast<double>(rng() % 1000) / 250.0;
        if (rng() % 13 == 0) v = kGap;
    }
    const HeatmapMatrix m = heatmap(s);

    for (unsigned month = 1; month <= 12; ++month) {
        for (unsigned hour = 0; hour < 24; ++hour) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (is_gap(s.values[i])) continue;
                const UtcHour t = s.time_at(i);
                if (t.month() == month && t.hour_of_day() == hour) {
                    sum += s.values[i];
                    ++count;
                }
            }
            if (count == 0)
                CHECK(is_gap(m.cells[month - 1][hour]));
            else
                CHECK(m.cells[month - 1][hour] == doctest::Approx(sum / count).epsilon(1e-12));
        }
    }
}

TEST_CASE("compare sorts by MAE and rejects mixed energy types") {
    EvaluationReport a;
    a.model_id = "a";
    a.mae = 0.3;
    EvaluationReport b;
    b.model_id = "b";
    b.mae = 0.1;
    EvaluationReport c;
    c.model_id = "c";
    c.mae = 0.2;

    const auto sorted = compare({a, b, c});
    CHECK(sorted[0].model_id == "b");
    CHECK(sorted[1].model_id == "c");
    CHECK(sorted[2].model_id == "a");
    CHECK(compare({a}).size() == 1);

    EvaluationReport w = a;
    w.energy_type = EnergyType::wind;
    CHECK_THROWS_AS(compare({a, w}), Error);
    CHECK_THROWS_AS(compare({}), Error);
}

TEST_CASE("common support gaps every run identically") {
    auto r1 = run_of({1, 2, 3, 4}, {1, kGap, 3, 4});
    auto r2 = run_of({1, 2, 3, kGap}, {1, 2, 3, 4});
    const auto restricted = restrict_to_common_support({r1, r2});
    for (const auto& r : restricted) {
        CHECK(valid_hours(r) == 2);
        CHECK(is_gap(r.predictions.values[1]));
        CHECK(is_gap(r.predictions.values[3]));
    }
}

TEST_CASE("report JSON round trip and comparison CSV shape") {
    EvaluationReport r;
    r.model_id = "hybrid";
    r.energy_type = EnergyType::wind;
    r.mae = 0.069;
    r.rmse = 0.088;
    r.intervals = {77.5, 15.0, 7.5};
    r.n_hours = 8784;
    const EvaluationReport back = report_from_json(report_to_json(r));
    CHECK(back.model_id == r.model_id);
    CHECK(back.energy_type == r.energy_type);
    CHECK(back.mae == r.mae);
    CHECK(back.intervals.over_15 == r.intervals.over_15);
    CHECK(back.n_hours == r.n_hours);

    std::ostringstream out;
    write_comparison_csv(out, {r});
    std::istringstream lines(out.str());
    std::string header, row, extra;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "model_id,mae,rmse,under_10,between_10_15,over_15,n_hours");
    CHECK(row.rfind("hybrid,", 0) == 0);
    CHECK_FALSE(std::getline(lines, extra));
}

TEST_CASE("heatmap CSV has 12 rows of 24 columns") {
    TimeSeries s;
    s.start = UtcHour::from_civil({2018, 1, 1}, 0);
    s.values.assign(24 * 365, 0.5);
    std::ostringstream out;
    write_heatmap_csv(out, heatmap(s));
    std::istringstream lines(out.str());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 23);
        ++rows;
    }
    CHECK(rows == 12);
}

TEST_CASE("heatmap SVG renders without empty output") {
    TimeSeries s;
    s.start = UtcHour::from_civil({2018, 1, 1}, 0);
    s.values.assign(24 * 365, 0.5);
    std::ostringstream out;
    write_heatmap_svg(out, heatmap(s), "solar");
    CHECK(out.str().find("<svg") != std::string::npos);
    CHECK(out.str().find("</svg>") != std::string::npos);
}
