#include "rescast/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

std::string RunConfig::resolved_energy_column() const {
    if (!energy_column.empty()) return energy_column;
    return energy_type == EnergyType::solar ? "solar_mw" : "wind_mw";
}

namespace {

UtcHour parse_hour_field(const nlohmann::json& j, const char* field) {
    UtcHour t;
    bool on_hour = true;
    const auto text = j.at(field).get<std::string>();
    if (!parse_iso_hour(text, t, on_hour))
        throw Error(Errc::Config, std::string("bad timestamp in config field '") + field + "': " +
                                      text);
    return t;
}

void parse_stad(const nlohmann::json& j, StadConfig& cfg) {
    if (j.contains("blocks")) {
        cfg.blocks.clear();
        for (const auto& b : j.at("blocks"))
            cfg.blocks.push_back({b.at("name").get<std::string>(),
                                  b.at("period_hours").get<double>(), b.at("order").get<int>()});
    }
    if (j.contains("dayparts") && j.at("dayparts").is_boolean() && !j.at("dayparts").get<bool>())
        cfg.dayparts.clear();
    if (j.contains("changepoints")) cfg.changepoints = j.at("changepoints").get<int>();
    if (j.contains("trend_reg")) cfg.trend_reg = j.at("trend_reg").get<double>();
    if (j.contains("seasonal_reg")) cfg.seasonal_reg = j.at("seasonal_reg").get<double>();
    if (j.contains("regressor_reg")) cfg.regressor_reg = j.at("regressor_reg").get<double>();
    if (j.contains("subtract_trend")) cfg.subtract_trend = j.at("subtract_trend").get<bool>();
    if (j.contains("holidays")) {
        cfg.holidays.clear();
        for (const auto& h : j.at("holidays")) {
            CivilDate d;
            if (!parse_civil_date(h.get<std::string>(), d))
                throw Error(Errc::Config, "bad holiday date " + h.get<std::string>());
            cfg.holidays.push_back(d);
        }
    }
}

void parse_pipeline(const nlohmann::json& j, RunConfig& cfg) {
    auto& pipe = cfg.pipeline;
    if (j.contains("features")) {
        const auto kind = j.at("features").get<std::string>();
        if (kind == "canonical")
            pipe.ml_features = FeatureSpec::canonical(cfg.energy_type);
        else if (kind == "full_window")
            pipe.ml_features = FeatureSpec::full_window(cfg.energy_type);
        else if (kind == "raw_lags")
            pipe.ml_features = FeatureSpec::raw_lags();
        else
            throw Error(Errc::Config, "unknown feature recipe '" + kind + "'");
    }
    if (j.contains("feature_target_width"))
        pipe.ml_features = FeatureSpec::canonical(cfg.energy_type,
                                                  j.at("feature_target_width").get<std::size_t>());
    if (j.contains("rfe_k")) pipe.rfe_k = j.at("rfe_k").get<std::size_t>();
    pipe.rfe_k = std::min(pipe.rfe_k, pipe.ml_features.width());
    if (j.contains("rfe_step")) pipe.rfe_step = j.at("rfe_step").get<std::size_t>();
    if (j.contains("ridge_lambda")) pipe.ridge_lambda = j.at("ridge_lambda").get<double>();
    if (j.contains("val_fraction")) pipe.val_fraction = j.at("val_fraction").get<double>();
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("n_estimators"))
            pipe.grid.n_estimators = g.at("n_estimators").get<std::vector<int>>();
        if (g.contains("max_depth")) pipe.grid.max_depth = g.at("max_depth").get<std::vector<int>>();
        if (g.contains("min_samples_split"))
            pipe.grid.min_samples_split = g.at("min_samples_split").get<std::vector<int>>();
    }
    if (j.contains("stad")) parse_stad(j.at("stad"), pipe.stad);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Config, std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    if (j.contains("energy_type"))
        cfg.energy_type = energy_type_from_string(j.at("energy_type").get<std::string>());
    cfg.pipeline = default_pipeline(cfg.energy_type);

    if (j.contains("generation_csv")) cfg.generation_csv = j.at("generation_csv").get<std::string>();
    if (j.contains("weather_csv")) cfg.weather_csv = j.at("weather_csv").get<std::string>();
    if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
    if (j.contains("artifacts_dir")) cfg.artifacts_dir = j.at("artifacts_dir").get<std::string>();
    if (j.contains("energy_column")) cfg.energy_column = j.at("energy_column").get<std::string>();
    if (j.contains("split")) {
        cfg.split.train_end = parse_hour_field(j.at("split"), "train_end");
        cfg.split.test_end = parse_hour_field(j.at("split"), "test_end");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gaps")) {
        const auto& g = j.at("gaps");
        if (g.contains("max_fill")) cfg.gaps.max_fill = g.at("max_fill").get<int>();
        if (g.contains("max_gap_fraction"))
            cfg.gaps.max_gap_fraction = g.at("max_gap_fraction").get<double>();
    }
    if (j.contains("persistence_days"))
        cfg.persistence_days = j.at("persistence_days").get<std::vector<int>>();
    if (j.contains("pipeline")) parse_pipeline(j.at("pipeline"), cfg);
    cfg.pipeline.seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Config, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["generation_csv"] = cfg.generation_csv;
    j["weather_csv"] = cfg.weather_csv;
    j["dataset"] = cfg.dataset;
    j["artifacts_dir"] = cfg.artifacts_dir;
    j["energy_type"] = to_string(cfg.energy_type);
    j["energy_column"] = cfg.resolved_energy_column();
    j["split"] = {{"train_end", to_iso_string(cfg.split.train_end)},
                  {"test_end", to_iso_string(cfg.split.test_end)}};
    j["seed"] = cfg.seed;
    j["gaps"] = {{"max_fill", cfg.gaps.max_fill}, {"max_gap_fraction", cfg.gaps.max_gap_fraction}};
    j["persistence_days"] = cfg.persistence_days;
    j["pipeline"] = {{"rfe_k", cfg.pipeline.rfe_k},
                     {"rfe_step", cfg.pipeline.rfe_step},
                     {"ridge_lambda", cfg.pipeline.ridge_lambda},
                     {"val_fraction", cfg.pipeline.val_fraction},
                     {"feature_width", cfg.pipeline.ml_features.width()},
                     {"grid",
                      {{"n_estimators", cfg.pipeline.grid.n_estimators},
                       {"max_depth", cfg.pipeline.grid.max_depth},
                       {"min_samples_split", cfg.pipeline.grid.min_samples_split}}},
                     {"stad",
                      {{"changepoints", cfg.pipeline.stad.changepoints},
                       {"trend_reg", cfg.pipeline.stad.trend_reg},
                       {"seasonal_reg", cfg.pipeline.stad.seasonal_reg},
                       {"regressor_reg", cfg.pipeline.stad.regressor_reg},
                       {"subtract_trend", cfg.pipeline.stad.subtract_trend}}}};
    return j.dump(2);
}

}  // namespace rescast
