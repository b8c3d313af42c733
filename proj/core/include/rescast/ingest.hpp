#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rescast/series.hpp"

namespace rescast {

enum class EnergyType { solar, wind };

inline const char* to_string(EnergyType t) { return t == EnergyType::solar ? "solar" : "wind"; }
EnergyType energy_type_from_string(const std::string& s);

/// Multi-variable hourly weather block sharing one start and one length.
/// Variable names are unique; gaps are NaN, as in TimeSeries.
struct WeatherFrame {
    UtcHour start{};
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one per name, equal lengths

    std::size_t size() const { return columns.empty() ? 0 : columns[0].size(); }
    UtcHour end() const { return start + static_cast<std::int64_t>(size()); }
    std::int64_t index_of(UtcHour t) const {
        std::int64_t i = t - start;
        return (i >= 0 && i < static_cast<std::int64_t>(size())) ? i : -1;
    }
    /// Column index for a variable name, or -1.
    std::int64_t find(const std::string& name) const;

    WeatherFrame slice(UtcHour from, UtcHour to) const;
};

/// Gap handling during alignment: bridge short dropouts by forward fill,
/// keep anything longer as gaps.
struct GapPolicy {
    int max_fill = 3;               // hours a forward fill may bridge
    double max_gap_fraction = 0.05; // residual gap share tolerated per variable
};

struct AlignedDataset {
    TimeSeries energy;
    WeatherFrame weather;
    EnergyType energy_type = EnergyType::solar;
};

/// Reads a generation CSV (header `timestamp` + value columns) and extracts
/// one column as an hourly series. Missing rows become gaps, duplicate
/// timestamps resolve last-wins, off-hour timestamps are rejected.
TimeSeries parse_generation_csv(std::istream& source, const std::string& column);

/// Reads a weather CSV (header `timestamp` + one column per variable).
WeatherFrame parse_weather_csv(std::istream& source);

/// Trims both inputs to the intersection of their spans and applies the gap
/// policy to every variable (energy included).
AlignedDataset align(const TimeSeries& energy, const WeatherFrame& weather,
                     const GapPolicy& policy = {});

/// Canonical persisted form: timestamp, energy column, weather columns, in
/// the same CSV dialect the parsers accept. Gaps serialize as empty cells.
void write_canonical_csv(std::ostream& out, const AlignedDataset& data);
AlignedDataset read_canonical_csv(std::istream& in, const std::string& energy_column,
                                  EnergyType type);

}  // namespace rescast
