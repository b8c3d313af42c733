#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rescast/ingest.hpp"
#include "rescast/series.hpp"

namespace rescast {

struct SinCos {
    double sin = 0.0;
    double cos = 1.0;
};

/// Polar encoding of the calendar fields of one hour. Periods: hour 24,
/// day_of_week 7, day_of_month = days in that month, day_of_year = 365/366,
/// month 12. Zero-based position p maps to (sin(2*pi*p/P), cos(2*pi*p/P)).
std::map<std::string, SinCos> encode_cyclical(UtcHour t);

/// One weather design column: a variable sampled at a fixed hour offset
/// relative to the target (negative = past, positive = forecast lead).
struct WeatherColumnSpec {
    std::string var;
    int offset = 0;
};

/// Recipe for the design matrix. The availability constraint is baked in:
/// lag offsets start at 48 hours and weather offsets never exceed +24.
struct FeatureSpec {
    bool cyclical = true;
    int lag_min = 48;   // nearest usable energy observation
    int lag_max = 96;   // oldest lag, inclusive
    bool rolling = true;
    int rolling_from = 96;  // window [t - rolling_from, t - rolling_to]
    int rolling_to = 48;
    std::vector<WeatherColumnSpec> weather_cols;

    static std::vector<std::string> weather_vars_for(EnergyType type);

    /// Canonical pipeline recipe: 10 cyclical + 49 lags + 6 rolling columns
    /// plus weather offsets {-24,-12,-6,-3,-1,+1,+3,+6,+12,+24} per variable,
    /// padded column-wise with the nearest remaining offsets until the
    /// nominal width reaches `target_width` (or the full +-24 window runs
    /// out, whichever comes first).
    static FeatureSpec canonical(EnergyType type, std::size_t target_width = 176);

    /// Every offset in [-24, +24] for every variable of the energy type.
    static FeatureSpec full_window(EnergyType type);

    /// Autoregressive lags only; the "without feature engineering" variant.
    static FeatureSpec raw_lags();

    /// No columns at all; valid rows are simply hours with a present target.
    static FeatureSpec none();

    /// External-regressor recipe for the decomposer: rolling statistics,
    /// energy lags 48..72h, weather lags 48..72h and leads +1..+24h.
    static FeatureSpec decomposer_regressors(EnergyType type);

    std::size_t width() const;
    std::vector<std::string> column_names() const;
};

/// Records every data access made while assembling forecast inputs, keyed by
/// the target hour, so the availability constraint can be audited.
struct AccessAudit {
    UtcHour target{};
    struct Read {
        UtcHour target;
        UtcHour accessed;
    };
    std::vector<Read> energy_reads;
    std::vector<Read> weather_reads;

    void note_energy(UtcHour accessed) { energy_reads.push_back({target, accessed}); }
    void note_weather(UtcHour accessed) { weather_reads.push_back({target, accessed}); }

    /// Reads of energy newer than target - max_lag hours.
    std::size_t energy_violations(int max_lag = 48) const;
    /// Reads of weather newer than target + max_lead hours.
    std::size_t weather_violations(int max_lead = 24) const;
};

/// Row-per-target-hour design matrix with named columns, stored row-major.
struct FeatureMatrix {
    std::vector<std::string> col_names;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;
    std::vector<double> target;
    std::vector<UtcHour> row_times;

    double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * n_cols, n_cols};
    }

    FeatureMatrix select(const std::vector<std::size_t>& cols) const;
    std::vector<std::size_t> indices_of(const std::vector<std::string>& names) const;
};

/// Assembles feature rows against a scaled dataset. A row is invalid when
/// any required value is a gap or falls outside the data span.
class RowAssembler {
public:
    RowAssembler(const AlignedDataset& scaled, const FeatureSpec& spec);

    std::size_t width() const { return width_; }

    /// Writes the features for target index `t` into `out` (size width()).
    /// Returns false when the row is invalid. `audit`, when set, records
    /// every energy/weather access under the current audit target.
    bool assemble(std::size_t t, std::span<double> out, AccessAudit* audit = nullptr) const;

private:
    const AlignedDataset& data_;
    const FeatureSpec& spec_;
    std::vector<std::size_t> weather_var_idx_;
    std::size_t width_;
};

double rolling_skewness(std::span<const double> window);

/// Lag block for one target index: y[t-lag_min] .. y[t-lag_max].
/// Throws InsufficientHistory when the window starts before the series;
/// a gap inside the window marks the row invalid (returns false).
bool lag_features(const TimeSeries& energy, std::size_t t, const FeatureSpec& spec,
                  std::span<double> out);

/// {min, max, mean, skew, var, std} over [t - rolling_from, t - rolling_to].
/// Variance and skewness are population-form; a zero-variance window has
/// skewness 0 by definition.
struct RollingStats {
    double min, max, mean, skew, var, std;
};
RollingStats rolling_stats(const TimeSeries& energy, std::size_t t, const FeatureSpec& spec);

/// Builds the full design matrix over [from, to) target hours (defaults to
/// the whole span). Rows with any gap-derived feature or a gap target are
/// dropped; throws EmptyMatrix when nothing survives.
FeatureMatrix build_matrix(const AlignedDataset& scaled, const FeatureSpec& spec);
FeatureMatrix build_matrix(const AlignedDataset& scaled, const FeatureSpec& spec, UtcHour from,
                           UtcHour to, AccessAudit* audit = nullptr,
                           bool require_target = true);

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m);

std::string feature_spec_to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const std::string& text);

}  // namespace rescast
