#include "rescast/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

namespace {

/// Applies fn to every |predicted - actual| where both sides are present.
template <typename Fn>
std::size_t for_each_error(const ForecastRun& run, Fn&& fn) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        const double p = run.predictions.values[i];
        const double a = run.actuals.values[i];
        if (is_gap(p) || is_gap(a)) continue;
        fn(std::abs(p - a));
        ++n;
    }
    return n;
}

std::size_t require_nonempty(const ForecastRun& run, std::size_t n) {
    if (n == 0)
        throw Error(Errc::EmptyRun, "run '" + run.model_id + "' has no scored hours");
    return n;
}

}  // namespace

std::size_t valid_hours(const ForecastRun& run) {
    return for_each_error(run, [](double) {});
}

double mae(const ForecastRun& run) {
    double sum = 0.0;
    const std::size_t n = require_nonempty(run, for_each_error(run, [&](double e) { sum += e; }));
    return sum / static_cast<double>(n);
}

double rmse(const ForecastRun& run) {
    double sum = 0.0;
    const std::size_t n =
        require_nonempty(run, for_each_error(run, [&](double e) { sum += e * e; }));
    return std::sqrt(sum / static_cast<double>(n));
}

IntervalPcts error_intervals(const ForecastRun& run) {
    std::size_t under = 0, mid = 0, over = 0;
    const std::size_t n = require_nonempty(run, for_each_error(run, [&](double e) {
                              if (e < 0.10)
                                  ++under;
                              else if (e <= 0.15)
                                  ++mid;
                              else
                                  ++over;
                          }));
    const double scale = 100.0 / static_cast<double>(n);
    return IntervalPcts{static_cast<double>(under) * scale, static_cast<double>(mid) * scale,
                        static_cast<double>(over) * scale};
}

EvaluationReport evaluate(const ForecastRun& run) {
    EvaluationReport r;
    r.model_id = run.model_id;
    r.energy_type = run.energy_type;
    r.mae = mae(run);
    r.rmse = rmse(run);
    r.intervals = error_intervals(run);
    r.n_hours = valid_hours(run);
    return r;
}

std::vector<ForecastRun> restrict_to_common_support(std::vector<ForecastRun> runs) {
    if (runs.empty()) return runs;
    const UtcHour start = runs.front().predictions.start;
    const std::size_t len = runs.front().predictions.size();
    for (const auto& run : runs)
        if (run.predictions.start != start || run.predictions.size() != len)
            throw Error(Errc::OutOfRange, "runs do not share one evaluation span");

    std::vector<bool> keep(len, true);
    for (const auto& run : runs)
        for (std::size_t i = 0; i < len; ++i)
            if (is_gap(run.predictions.values[i]) || is_gap(run.actuals.values[i]))
                keep[i] = false;

    for (auto& run : runs)
        for (std::size_t i = 0; i < len; ++i)
            if (!keep[i]) {
                run.predictions.values[i] = kGap;
                run.actuals.values[i] = kGap;
            }
    return runs;
}

HeatmapMatrix heatmap(const TimeSeries& series) {
    std::array<std::array<double, 24>, 12> sums{};
    std::array<std::array<std::size_t, 24>, 12> counts{};
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double v = series.values[i];
        if (is_gap(v)) continue;
        const UtcHour t = series.time_at(i);
        const std::size_t m = t.month() - 1;
        const std::size_t h = t.hour_of_day();
        sums[m][h] += v;
        ++counts[m][h];
    }
    HeatmapMatrix out;
    for (std::size_t m = 0; m < 12; ++m)
        for (std::size_t h = 0; h < 24; ++h)
            out.cells[m][h] =
                counts[m][h] > 0 ? sums[m][h] / static_cast<double>(counts[m][h]) : kGap;
    return out;
}

std::vector<EvaluationReport> compare(std::vector<EvaluationReport> reports) {
    if (reports.empty()) throw Error(Errc::EmptyRun, "nothing to compare");
    for (const auto& r : reports)
        if (r.energy_type != reports.front().energy_type)
            throw Error(Errc::MixedEnergyTypes, "reports mix solar and wind runs");
    std::stable_sort(reports.begin(), reports.end(),
                     [](const auto& a, const auto& b) { return a.mae < b.mae; });
    return reports;
}

namespace {
nlohmann::json report_json(const EvaluationReport& r) {
    return {{"model_id", r.model_id},
            {"energy_type", to_string(r.energy_type)},
            {"mae", r.mae},
            {"rmse", r.rmse},
            {"intervals",
             {{"under_10", r.intervals.under_10},
              {"between_10_15", r.intervals.between_10_15},
              {"over_15", r.intervals.over_15}}},
            {"n_hours", r.n_hours}};
}
}  // namespace

std::string report_to_json(const EvaluationReport& r) { return report_json(r).dump(2); }

EvaluationReport report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    EvaluationReport r;
    r.model_id = j.at("model_id").get<std::string>();
    r.energy_type = energy_type_from_string(j.at("energy_type").get<std::string>());
    r.mae = j.at("mae").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.intervals.under_10 = j.at("intervals").at("under_10").get<double>();
    r.intervals.between_10_15 = j.at("intervals").at("between_10_15").get<double>();
    r.intervals.over_15 = j.at("intervals").at("over_15").get<double>();
    r.n_hours = j.at("n_hours").get<std::size_t>();
    return r;
}

namespace {
void append_num(std::string& line, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, p);
}
}  // namespace

void write_comparison_csv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    out << "model_id,mae,rmse,under_10,between_10_15,over_15,n_hours\n";
    for (const auto& r : reports) {
        std::string line = r.model_id;
        for (double v : {r.mae, r.rmse, r.intervals.under_10, r.intervals.between_10_15,
                         r.intervals.over_15}) {
            line += ',';
            append_num(line, v);
        }
        line += ',' + std::to_string(r.n_hours);
        out << line << '\n';
    }
}

std::string comparison_to_json(const std::vector<EvaluationReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(report_json(r));
    return j.dump(2);
}

void write_heatmap_csv(std::ostream& out, const HeatmapMatrix& m) {
    for (std::size_t month = 0; month < 12; ++month) {
        std::string line;
        for (std::size_t h = 0; h < 24; ++h) {
            if (h > 0) line += ',';
            if (!is_gap(m.cells[month][h])) append_num(line, m.cells[month][h]);
        }
        out << line << '\n';
    }
}

void write_heatmap_svg(std::ostream& out, const HeatmapMatrix& m, const std::string& title) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : m.cells)
        for (double v : row)
            if (!is_gap(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!(hi > lo)) {
        lo = 0.0;
        hi = 1.0;
    }

    const int cell = 24, left = 40, top = 30;
    const int w = left + 24 * cell + 10, h = top + 12 * cell + 10;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n";
    out << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    for (std::size_t month = 0; month < 12; ++month) {
        out << "<text x=\"4\" y=\"" << top + month * cell + cell / 2 + 4
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << month + 1 << "</text>\n";
        for (std::size_t hour = 0; hour < 24; ++hour) {
            const double v = m.cells[month][hour];
            std::string fill = "#dddddd";
            if (!is_gap(v)) {
                const double u = (v - lo) / (hi - lo);
                // Dark blue (low) to bright yellow (high).
                const int r = static_cast<int>(20 + 235 * u);
                const int g = static_cast<int>(20 + 215 * u);
                const int b = static_cast<int>(90 - 70 * u + 20);
                char buf[8];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
                fill = buf;
            }
            out << "<rect x=\"" << left + hour * cell << "\" y=\"" << top + month * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
                << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace rescast
