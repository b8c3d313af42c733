#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "rescast/forecasters.hpp"

namespace rescast {

/// Share of hours whose scaled absolute error falls under 10%, between 10%
/// and 15% (closed interval), or above 15%. Percentages, summing to 100.
struct IntervalPcts {
    double under_10 = 0.0;
    double between_10_15 = 0.0;
    double over_15 = 0.0;
};

struct EvaluationReport {
    std::string model_id;
    EnergyType energy_type = EnergyType::solar;
    double mae = 0.0;
    double rmse = 0.0;
    IntervalPcts intervals;
    std::size_t n_hours = 0;
};

/// Hours where both prediction and actual are present.
std::size_t valid_hours(const ForecastRun& run);

double mae(const ForecastRun& run);
double rmse(const ForecastRun& run);
IntervalPcts error_intervals(const ForecastRun& run);
EvaluationReport evaluate(const ForecastRun& run);

/// Gaps every run at hours where any run lacks a prediction or actual, so
/// all models are scored on one shared support set.
std::vector<ForecastRun> restrict_to_common_support(std::vector<ForecastRun> runs);

/// Mean scaled generation per (month, hour) cell; NaN marks cells with no
/// present observations. Rows are months 1..12, columns hours 0..23.
struct HeatmapMatrix {
    std::array<std::array<double, 24>, 12> cells{};
};

HeatmapMatrix heatmap(const TimeSeries& series);

/// Rows sorted by MAE ascending; all reports must share one energy type.
std::vector<EvaluationReport> compare(std::vector<EvaluationReport> reports);

std::string report_to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const std::string& text);
void write_comparison_csv(std::ostream& out, const std::vector<EvaluationReport>& reports);
std::string comparison_to_json(const std::vector<EvaluationReport>& reports);
void write_heatmap_csv(std::ostream& out, const HeatmapMatrix& m);
void write_heatmap_svg(std::ostream& out, const HeatmapMatrix& m, const std::string& title);

}  // namespace rescast
