#include "rescast/forecasters.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::persistence: return "persistence";
        case ModelKind::ml_direct: return "ml_direct";
        case ModelKind::stad_direct: return "stad_direct";
        case ModelKind::hybrid: return "hybrid";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "persistence") return ModelKind::persistence;
    if (s == "ml" || s == "ml_direct") return ModelKind::ml_direct;
    if (s == "stad" || s == "stad_direct") return ModelKind::stad_direct;
    if (s == "hybrid") return ModelKind::hybrid;
    throw Error(Errc::Config, "unknown model kind '" + s + "'");
}

PipelineConfig default_pipeline(EnergyType type, std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.ml_features = FeatureSpec::canonical(type);
    cfg.rfe_k = type == EnergyType::solar ? 150 : 160;
    cfg.rfe_k = std::min(cfg.rfe_k, cfg.ml_features.width());
    cfg.stad_regressors = FeatureSpec::decomposer_regressors(type);
    cfg.stad.regressor_names = cfg.stad_regressors.column_names();
    cfg.seed = seed;
    return cfg;
}

ScalerSet fit_scalers(const AlignedDataset& train) {
    ScalerSet s;
    s.energy = minmax_fit(train.energy);
    s.weather_names = train.weather.names;
    s.weather.reserve(train.weather.names.size());
    for (std::size_t c = 0; c < train.weather.columns.size(); ++c) {
        TimeSeries tmp;
        tmp.start = train.weather.start;
        tmp.name = train.weather.names[c];
        tmp.values = train.weather.columns[c];
        s.weather.push_back(minmax_fit(tmp));
    }
    return s;
}

AlignedDataset apply_scalers(const AlignedDataset& data, const ScalerSet& scalers) {
    AlignedDataset out = data;
    out.energy = minmax_transform(data.energy, scalers.energy);
    for (std::size_t c = 0; c < out.weather.columns.size(); ++c) {
        const auto it = std::find(scalers.weather_names.begin(), scalers.weather_names.end(),
                                  out.weather.names[c]);
        if (it == scalers.weather_names.end())
            throw Error(Errc::Config,
                        "no scaler fitted for weather variable '" + out.weather.names[c] + "'");
        const auto& p =
            scalers.weather[static_cast<std::size_t>(it - scalers.weather_names.begin())];
        const double range = p.max - p.min;
        for (double& v : out.weather.columns[c])
            if (!is_gap(v)) v = (v - p.min) / range;
    }
    return out;
}

AlignedDataset slice_dataset(const AlignedDataset& data, UtcHour from, UtcHour to) {
    AlignedDataset out;
    out.energy_type = data.energy_type;
    out.energy = data.energy.slice(from, to);
    out.weather = data.weather.slice(from, to);
    return out;
}

double persistence_forecast(const TimeSeries& history, std::size_t t, int n_days,
                            AccessAudit* audit) {
    const std::int64_t lag = 24 * static_cast<std::int64_t>(n_days);
    if (static_cast<std::int64_t>(t) - lag < 0)
        throw Error(Errc::InsufficientHistory,
                    "persistence needs " + std::to_string(lag) + " hours of history");
    const std::size_t src = t - static_cast<std::size_t>(lag);
    if (audit) {
        audit->target = history.time_at(t);
        audit->note_energy(history.time_at(src));
    }
    const double v = history.values[src];
    if (is_gap(v))
        throw Error(Errc::GapAtLag, "gap at lag " + std::to_string(lag) + " before " +
                                        to_iso_string(history.time_at(t)));
    return v;
}

Forecaster fit_persistence(const AlignedDataset& train, int n_days, const PipelineConfig& cfg) {
    if (n_days < 1) throw Error(Errc::Config, "persistence horizon must be >= 1 day");
    Forecaster f;
    f.kind = ModelKind::persistence;
    f.model_id = "persistence_t" + std::to_string(n_days);
    f.energy_type = train.energy_type;
    f.persistence_days = n_days;
    f.scalers = fit_scalers(train);
    f.cfg = cfg;
    return f;
}

namespace {

/// Shared tail of the ml_direct and hybrid pipelines: selection, grid
/// search, final forest on the chosen columns.
void fit_tree_stage(Forecaster& f, const FeatureMatrix& X, std::span<const double> target,
                    const PipelineConfig& cfg) {
    const std::size_t k = std::min(cfg.rfe_k, X.n_cols);
    f.selection = rfe(X, target, k, cfg.rfe_step, cfg.ridge_lambda);
    const FeatureMatrix Xsel = X.select(X.indices_of(f.selection.kept_columns));
    f.grid = grid_search(cfg.grid, Xsel, target, cfg.val_fraction, cfg.seed);
    ExtParams params = f.grid.best;
    params.seed = cfg.seed;
    f.forest = ext_fit(Xsel, target, params);
}

StadModel fit_stad_stage(const AlignedDataset& scaled, const PipelineConfig& cfg) {
    const FeatureMatrix Xr = build_matrix(scaled, cfg.stad_regressors);
    const FeatureMatrix* regressors = cfg.stad.regressor_names.empty() ? nullptr : &Xr;
    return stad_fit(Xr.row_times, Xr.target, regressors, cfg.stad);
}

}  // namespace

Forecaster fit_ml_direct(const AlignedDataset& train, const PipelineConfig& cfg) {
    Forecaster f;
    f.kind = ModelKind::ml_direct;
    f.model_id = "ml_direct";
    f.energy_type = train.energy_type;
    f.scalers = fit_scalers(train);
    f.cfg = cfg;

    const AlignedDataset scaled = apply_scalers(train, f.scalers);
    const FeatureMatrix X = build_matrix(scaled, cfg.ml_features);
    fit_tree_stage(f, X, X.target, cfg);
    return f;
}

Forecaster fit_stad_direct(const AlignedDataset& train, const PipelineConfig& cfg) {
    Forecaster f;
    f.kind = ModelKind::stad_direct;
    f.model_id = "stad_direct";
    f.energy_type = train.energy_type;
    f.scalers = fit_scalers(train);
    f.cfg = cfg;

    const AlignedDataset scaled = apply_scalers(train, f.scalers);
    f.stad = fit_stad_stage(scaled, cfg);
    return f;
}

Forecaster fit_hybrid(const AlignedDataset& train, const PipelineConfig& cfg) {
    Forecaster f;
    f.kind = ModelKind::hybrid;
    f.model_id = "hybrid";
    f.energy_type = train.energy_type;
    f.scalers = fit_scalers(train);
    f.cfg = cfg;

    const AlignedDataset scaled = apply_scalers(train, f.scalers);

    // Step 1-2: decomposer with custom seasonalities and regressors, fitted
    // on the training energy.
    f.stad = fit_stad_stage(scaled, cfg);

    // Step 3: the deseasoned series becomes the tree-ensemble target.
    const FeatureMatrix X = build_matrix(scaled, cfg.ml_features);
    std::vector<double> residual(X.n_rows);
    for (std::size_t i = 0; i < X.n_rows; ++i) {
        const UtcHour t = X.row_times[i];
        double sub = f.stad->seasonal_at(t) + f.stad->holiday_at(t);
        if (cfg.stad.subtract_trend) sub += f.stad->trend_at(t);
        residual[i] = X.target[i] - sub;
    }
    fit_tree_stage(f, X, residual, cfg);
    return f;
}

namespace {

struct SpanCheck {
    std::size_t offset;  // of `from` within the dataset
    std::size_t len;
};

SpanCheck check_span(const AlignedDataset& data, UtcHour from, UtcHour to) {
    if (from >= to) throw Error(Errc::OutOfRange, "empty forecast span");
    if (from < data.energy.start || to > data.energy.end())
        throw Error(Errc::OutOfRange, "forecast span outside dataset span");
    return {static_cast<std::size_t>(from - data.energy.start),
            static_cast<std::size_t>(to - from)};
}

}  // namespace

ForecastRun forecast(const Forecaster& f, const AlignedDataset& data, UtcHour from, UtcHour to,
                     AccessAudit* audit) {
    const SpanCheck span = check_span(data, from, to);
    const AlignedDataset scaled = apply_scalers(data, f.scalers);

    ForecastRun run;
    run.model_id = f.model_id;
    run.energy_type = f.energy_type;
    run.actuals = scaled.energy.slice(from, to);
    run.actuals.name = "actual";
    run.predictions.start = from;
    run.predictions.name = f.model_id;
    run.predictions.unit = "scaled";
    run.predictions.values.assign(span.len, kGap);

    switch (f.kind) {
        case ModelKind::persistence: {
            for (std::size_t i = 0; i < span.len; ++i) {
                try {
                    run.predictions.values[i] = persistence_forecast(
                        scaled.energy, span.offset + i, f.persistence_days, audit);
                } catch (const Error&) {
                    ++run.skipped;
                }
            }
            break;
        }
        case ModelKind::ml_direct: {
            const FeatureMatrix X = build_matrix(scaled, f.cfg.ml_features, from, to, audit,
                                                 /*require_target=*/false);
            const FeatureMatrix Xsel = X.select(X.indices_of(f.selection.kept_columns));
            const std::vector<double> preds = ext_predict(*f.forest, Xsel);
            for (std::size_t r = 0; r < Xsel.n_rows; ++r)
                run.predictions.values[static_cast<std::size_t>(Xsel.row_times[r] - from)] =
                    preds[r];
            run.skipped = span.len - Xsel.n_rows;
            break;
        }
        case ModelKind::stad_direct: {
            const StadModel& m = *f.stad;
            if (m.regressor_weights.empty()) {
                for (std::size_t i = 0; i < span.len; ++i) {
                    const UtcHour t = from + static_cast<std::int64_t>(i);
                    run.predictions.values[i] =
                        m.trend_at(t) + m.seasonal_at(t) + m.holiday_at(t);
                }
            } else {
                const FeatureMatrix Xr = build_matrix(scaled, f.cfg.stad_regressors, from, to,
                                                      audit, /*require_target=*/false);
                const auto cols = Xr.indices_of(m.config.regressor_names);
                for (std::size_t r = 0; r < Xr.n_rows; ++r) {
                    const UtcHour t = Xr.row_times[r];
                    double reg = 0.0;
                    const auto row = Xr.row(r);
                    for (std::size_t j = 0; j < cols.size(); ++j)
                        reg += m.regressor_weights[j] * row[cols[j]];
                    run.predictions.values[static_cast<std::size_t>(t - from)] =
                        m.trend_at(t) + m.seasonal_at(t) + m.holiday_at(t) + reg;
                }
                run.skipped = span.len - Xr.n_rows;
            }
            break;
        }
        case ModelKind::hybrid: {
            const StadModel& m = *f.stad;
            const FeatureMatrix X = build_matrix(scaled, f.cfg.ml_features, from, to, audit,
                                                 /*require_target=*/false);
            const FeatureMatrix Xsel = X.select(X.indices_of(f.selection.kept_columns));
            const std::vector<double> preds = ext_predict(*f.forest, Xsel);
            for (std::size_t r = 0; r < Xsel.n_rows; ++r) {
                const UtcHour t = Xsel.row_times[r];
                double add = m.seasonal_at(t) + m.holiday_at(t);
                if (f.cfg.stad.subtract_trend) add += m.trend_at(t);
                run.predictions.values[static_cast<std::size_t>(t - from)] = preds[r] + add;
            }
            run.skipped = span.len - Xsel.n_rows;
            break;
        }
    }
    return run;
}

namespace {

nlohmann::json scalers_to_json(const ScalerSet& s) {
    nlohmann::json j;
    j["energy"] = {{"min", s.energy.min}, {"max", s.energy.max}};
    auto& weather = j["weather"] = nlohmann::json::array();
    for (std::size_t i = 0; i < s.weather_names.size(); ++i)
        weather.push_back({{"name", s.weather_names[i]},
                           {"min", s.weather[i].min},
                           {"max", s.weather[i].max}});
    return j;
}

ScalerSet scalers_from_json(const nlohmann::json& j) {
    ScalerSet s;
    s.energy = {j.at("energy").at("min").get<double>(), j.at("energy").at("max").get<double>()};
    for (const auto& w : j.at("weather")) {
        s.weather_names.push_back(w.at("name").get<std::string>());
        s.weather.push_back({w.at("min").get<double>(), w.at("max").get<double>()});
    }
    return s;
}

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(Errc::Io, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Error(Errc::Io, "cannot write " + p.string());
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const Forecaster& f) {
    std::filesystem::create_directories(dir);

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["kind"] = to_string(f.kind);
    manifest["model_id"] = f.model_id;
    manifest["energy_type"] = to_string(f.energy_type);
    manifest["persistence_days"] = f.persistence_days;
    manifest["seed"] = f.cfg.seed;
    manifest["scalers"] = scalers_to_json(f.scalers);
    manifest["pipeline"] = {{"rfe_k", f.cfg.rfe_k},
                            {"rfe_step", f.cfg.rfe_step},
                            {"ridge_lambda", f.cfg.ridge_lambda},
                            {"val_fraction", f.cfg.val_fraction}};
    write_text_file(dir / "manifest.json", manifest.dump(2));

    write_text_file(dir / "ml_features.json", feature_spec_to_json(f.cfg.ml_features));
    write_text_file(dir / "stad_regressors.json", feature_spec_to_json(f.cfg.stad_regressors));
    if (f.forest) {
        write_text_file(dir / "selection.json", selection_to_json(f.selection));
        write_text_file(dir / "grid.json", grid_result_to_json(f.grid));
        std::ofstream out(dir / "forest.bin", std::ios::binary);
        if (!out) throw Error(Errc::Io, "cannot write " + (dir / "forest.bin").string());
        save_forest(out, *f.forest);
    }
    if (f.stad) write_text_file(dir / "stad.json", stad_to_json(*f.stad));
}

Forecaster load_bundle(const std::filesystem::path& dir) {
    const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    Forecaster f;
    f.kind = model_kind_from_string(manifest.at("kind").get<std::string>());
    f.model_id = manifest.at("model_id").get<std::string>();
    f.energy_type = energy_type_from_string(manifest.at("energy_type").get<std::string>());
    f.persistence_days = manifest.at("persistence_days").get<int>();
    f.scalers = scalers_from_json(manifest.at("scalers"));
    f.cfg.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& pipe = manifest.at("pipeline");
    f.cfg.rfe_k = pipe.at("rfe_k").get<std::size_t>();
    f.cfg.rfe_step = pipe.at("rfe_step").get<std::size_t>();
    f.cfg.ridge_lambda = pipe.at("ridge_lambda").get<double>();
    f.cfg.val_fraction = pipe.at("val_fraction").get<double>();

    f.cfg.ml_features = feature_spec_from_json(read_text_file(dir / "ml_features.json"));
    f.cfg.stad_regressors = feature_spec_from_json(read_text_file(dir / "stad_regressors.json"));
    if (std::filesystem::exists(dir / "forest.bin")) {
        f.selection = selection_from_json(read_text_file(dir / "selection.json"));
        std::ifstream in(dir / "forest.bin", std::ios::binary);
        if (!in) throw Error(Errc::Io, "cannot open " + (dir / "forest.bin").string());
        f.forest = load_forest(in);
    }
    if (std::filesystem::exists(dir / "stad.json")) {
        f.stad = stad_from_json(read_text_file(dir / "stad.json"));
        f.cfg.stad = f.stad->config;
    }
    return f;
}

void write_run_csv(std::ostream& out, const ForecastRun& run) {
    out << "timestamp,actual,predicted\n";
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        std::string line = to_iso_string(run.predictions.time_at(i));
        for (double v : {run.actuals.values[i], run.predictions.values[i]}) {
            line += ',';
            if (!is_gap(v)) {
                char buf[32];
                auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
                line.append(buf, p);
            }
        }
        out << line << '\n';
    }
}

ForecastRun read_run_csv(std::istream& in, const std::string& model_id, EnergyType type) {
    WeatherFrame frame = parse_weather_csv(in);
    if (frame.find("actual") < 0 || frame.find("predicted") < 0)
        throw Error(Errc::Parse, "run CSV needs 'actual' and 'predicted' columns");
    ForecastRun run;
    run.model_id = model_id;
    run.energy_type = type;
    run.actuals.start = frame.start;
    run.actuals.name = "actual";
    run.actuals.unit = "scaled";
    run.actuals.values = frame.columns[static_cast<std::size_t>(frame.find("actual"))];
    run.predictions.start = frame.start;
    run.predictions.name = model_id;
    run.predictions.unit = "scaled";
    run.predictions.values = frame.columns[static_cast<std::size_t>(frame.find("predicted"))];
    for (double v : run.predictions.values)
        if (is_gap(v)) ++run.skipped;
    return run;
}

}  // namespace rescast
