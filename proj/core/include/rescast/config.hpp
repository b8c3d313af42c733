#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rescast/forecasters.hpp"
#include "rescast/ingest.hpp"
#include "rescast/series.hpp"

namespace rescast {

/// One JSON file drives a whole run; command-line flags override individual
/// fields. Anything omitted keeps the documented default.
struct RunConfig {
    std::string generation_csv;
    std::string weather_csv;
    std::string dataset;  // canonical aligned CSV
    std::string artifacts_dir = "artifacts";
    EnergyType energy_type = EnergyType::solar;
    std::string energy_column;  // defaults to solar_mw / wind_mw
    SplitSpec split{UtcHour::from_civil({2020, 1, 1}, 0), UtcHour::from_civil({2021, 1, 1}, 0)};
    std::uint64_t seed = 42;
    GapPolicy gaps;
    std::vector<int> persistence_days = {2, 7, 30};
    PipelineConfig pipeline;  // derived from energy_type unless overridden

    std::string resolved_energy_column() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace rescast
