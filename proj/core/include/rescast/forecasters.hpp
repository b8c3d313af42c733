#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rescast/extra_trees.hpp"
#include "rescast/features.hpp"
#include "rescast/ingest.hpp"
#include "rescast/ridge.hpp"
#include "rescast/series.hpp"
#include "rescast/stad.hpp"

namespace rescast {

enum class ModelKind { persistence, ml_direct, stad_direct, hybrid };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// Everything a fit needs to know, bundled so runs are reproducible from a
/// single config value.
struct PipelineConfig {
    FeatureSpec ml_features;
    std::size_t rfe_k = 150;
    std::size_t rfe_step = 2;
    double ridge_lambda = 1.0;
    StadConfig stad;                 // regressor_names filled from stad_regressors
    FeatureSpec stad_regressors;
    ExtGrid grid;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Defaults matching the pipeline recipe for one energy type (canonical
/// feature spec, k = 150 solar / 160 wind, decomposer regressor set).
PipelineConfig default_pipeline(EnergyType type, std::uint64_t seed = 0);

/// Min-max parameters for the energy series and every weather variable,
/// always fitted on the training split only.
struct ScalerSet {
    ScalerParams energy;
    std::vector<std::string> weather_names;
    std::vector<ScalerParams> weather;
};

ScalerSet fit_scalers(const AlignedDataset& train);
AlignedDataset apply_scalers(const AlignedDataset& data, const ScalerSet& scalers);
AlignedDataset slice_dataset(const AlignedDataset& data, UtcHour from, UtcHour to);

/// A fitted model of any of the four §families plus the artifacts needed to
/// forecast under the availability constraint (energy no newer than t-48h,
/// weather no newer than t+24h).
struct Forecaster {
    ModelKind kind = ModelKind::persistence;
    std::string model_id;
    EnergyType energy_type = EnergyType::solar;
    int persistence_days = 0;       // persistence only
    ScalerSet scalers;
    PipelineConfig cfg;
    SelectionResult selection;      // ml_direct / hybrid
    GridResult grid;                // ml_direct / hybrid
    std::optional<Forest> forest;   // ml_direct / hybrid
    std::optional<StadModel> stad;  // stad_direct / hybrid
};

/// Eq.-style persistence read: y[t - 24*n_days], exactly.
double persistence_forecast(const TimeSeries& history, std::size_t t, int n_days,
                            AccessAudit* audit = nullptr);

Forecaster fit_persistence(const AlignedDataset& train, int n_days, const PipelineConfig& cfg);
Forecaster fit_ml_direct(const AlignedDataset& train, const PipelineConfig& cfg);
Forecaster fit_stad_direct(const AlignedDataset& train, const PipelineConfig& cfg);
Forecaster fit_hybrid(const AlignedDataset& train, const PipelineConfig& cfg);

struct ForecastRun {
    TimeSeries predictions;  // scaled; gaps at skipped hours
    TimeSeries actuals;      // scaled; gaps where ground truth is missing
    std::string model_id;
    EnergyType energy_type = EnergyType::solar;
    std::size_t skipped = 0;  // hours whose requirements were unsatisfiable
};

/// Walk-forward evaluation over [from, to): one prediction per hour, no
/// refitting, hours with unsatisfiable lag/lead requirements skipped and
/// counted. `data` is the full unscaled dataset (training + test); scaling
/// uses the parameters stored in the forecaster.
ForecastRun forecast(const Forecaster& f, const AlignedDataset& data, UtcHour from, UtcHour to,
                     AccessAudit* audit = nullptr);

void save_bundle(const std::filesystem::path& dir, const Forecaster& f);
Forecaster load_bundle(const std::filesystem::path& dir);

void write_run_csv(std::ostream& out, const ForecastRun& run);
ForecastRun read_run_csv(std::istream& in, const std::string& model_id, EnergyType type);

}  // namespace rescast
