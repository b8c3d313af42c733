#pragma once

#include <span>
#include <string>
#include <vector>

#include "rescast/features.hpp"
#include "rescast/series.hpp"

namespace rescast {

/// One Fourier seasonality block: a periodic component expressed as
/// sin/cos harmonics of a fixed period in hours.
struct SeasonalBlock {
    std::string name;
    double period_hours = 24.0;
    int order = 1;
};

/// Piecewise-constant time-of-day segment, [begin, end) in clock hours;
/// a segment may wrap past midnight (begin > end).
struct DaypartSpec {
    std::string name;
    int begin_hour = 0;
    int end_hour = 0;
};

struct StadConfig {
    std::vector<SeasonalBlock> blocks = {
        {"daily", 24.0, 6},
        {"weekly", 168.0, 3},
        {"yearly", 8766.0, 10},
        {"biseasonal", 4383.0, 2},
    };
    // Empty list disables the time-of-day component.
    std::vector<DaypartSpec> dayparts = {
        {"sunrise", 5, 8}, {"morning", 8, 12}, {"noon", 12, 16},
        {"sunset", 16, 20}, {"night", 20, 5},
    };
    int changepoints = 25;       // uniform over the first 80% of the fit span
    double trend_reg = 10.0;     // penalty on changepoint slope deltas
    double seasonal_reg = 1.0;   // penalty on Fourier, daypart and holiday weights
    double regressor_reg = 1.0;  // penalty on external regressor weights
    std::vector<std::string> regressor_names;
    std::vector<CivilDate> holidays;
    bool subtract_trend = false;  // deseasonalize removes g(t) as well
};

struct TrendParams {
    double intercept = 0.0;      // level at fit_start
    double slope = 0.0;          // per hour
    std::vector<UtcHour> changepoint_times;
    std::vector<double> deltas;  // slope change per hour at each changepoint
};

/// Fitted additive decomposition y(t) = g(t) + s(t) + h(t) + r(t) + e_t,
/// where r(t) is the external-regressor contribution (zero when the model
/// has none). Fitting is one penalized least-squares solve; the model is
/// immutable and deterministic for fixed inputs and config.
struct StadModel {
    StadConfig config;
    UtcHour fit_start{};
    UtcHour fit_end{};  // exclusive
    TrendParams trend;
    std::vector<std::vector<double>> seasonal_weights;  // per block: 2*order
    std::vector<double> daypart_weights;
    std::vector<double> holiday_weights;
    std::vector<double> regressor_weights;

    double trend_at(UtcHour t) const;
    /// Sum of all Fourier blocks plus the daypart term.
    double seasonal_at(UtcHour t) const;
    double block_at(UtcHour t, std::size_t block) const;
    double holiday_at(UtcHour t) const;
    double regressors_at(std::span<const double> row) const;
};

/// All component streams over one hour range. Streams that need data the
/// model cannot synthesize (regressor rows, actuals) carry gaps where that
/// data is unavailable. In-sample, trend + seasonal + holiday + regressor
/// + residual reproduces y and fitted + residual == y.
struct Decomposition {
    TimeSeries trend;
    TimeSeries seasonal;
    TimeSeries holiday;
    TimeSeries regressor;
    TimeSeries residual;
    TimeSeries fitted;
};

/// [sin(2*pi*k*t/P), cos(2*pi*k*t/P)] for k = 1..order. The phase is taken
/// modulo the period, so values at t and t + P are bit-identical.
std::vector<double> fourier_basis(double t_hours, double period_hours, int order);

/// [1, t, max(0, t - c_1), ..., max(0, t - c_m)] for sorted changepoints.
std::vector<double> trend_basis(double t_hours, const std::vector<double>& changepoints);

/// Fits the decomposer on gap-free samples. `times` must be strictly
/// increasing (not necessarily contiguous); `regressors`, when given, must
/// align row-for-row with `times` and carry cfg.regressor_names columns.
StadModel stad_fit(std::span<const UtcHour> times, std::span<const double> y,
                   const FeatureMatrix* regressors, const StadConfig& cfg);
StadModel stad_fit(const TimeSeries& y, const StadConfig& cfg);

/// Evaluates the components over [from, to). Outside the fit span the trend
/// extrapolates with its final slope and seasonality repeats periodically.
/// A model with regressors requires a regressor matrix; hours missing from
/// it yield gaps in the regressor/fitted/residual streams. Actuals, when
/// provided, fill the residual stream as y - fitted.
Decomposition stad_components(const StadModel& m, UtcHour from, UtcHour to,
                              const FeatureMatrix* regressors = nullptr,
                              const TimeSeries* actuals = nullptr);

/// y minus the seasonal and holiday components (and minus the trend when
/// cfg.subtract_trend is set). Gaps pass through.
TimeSeries deseasonalize(const TimeSeries& y, const StadModel& m);

void write_decomposition_csv(std::ostream& out, const Decomposition& d);

std::string stad_to_json(const StadModel& m);
StadModel stad_from_json(const std::string& text);

}  // namespace rescast
