#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rescast/time.hpp"

namespace rescast {

/// Gaps are carried in-band as quiet NaN so lag arithmetic stays positional.
inline constexpr double kGap = std::numeric_limits<double>::quiet_NaN();
inline bool is_gap(double v) { return std::isnan(v); }

/// Hourly UTC-indexed scalar series. Position fully determines time:
/// index i lives at start + i hours; the step is fixed at one hour.
/// Immutable by convention after construction.
struct TimeSeries {
    UtcHour start{};
    std::vector<double> values;  // NaN = gap
    std::string name;
    std::string unit;

    std::size_t size() const { return values.size(); }
    UtcHour time_at(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
    UtcHour end() const { return start + static_cast<std::int64_t>(values.size()); }

    /// Index of `t`, or -1 when t is outside the span.
    std::int64_t index_of(UtcHour t) const {
        std::int64_t i = t - start;
        return (i >= 0 && i < static_cast<std::int64_t>(values.size())) ? i : -1;
    }

    bool has_value(std::size_t i) const { return !is_gap(values[i]); }

    /// Sub-series covering [from, to). Both bounds must lie inside [start, end].
    TimeSeries slice(UtcHour from, UtcHour to) const;

    std::size_t present_count() const;
    std::size_t gap_count() const { return size() - present_count(); }
};

/// Min-max scaling parameters fitted over the present values of a series.
struct ScalerParams {
    double min = 0.0;
    double max = 1.0;
};

/// Chronological split boundaries; both exclusive ends align to whole hours.
struct SplitSpec {
    UtcHour train_end{};
    UtcHour test_end{};
};

ScalerParams minmax_fit(const TimeSeries& series);
TimeSeries minmax_transform(const TimeSeries& series, const ScalerParams& p);
TimeSeries minmax_inverse(const TimeSeries& series, const ScalerParams& p);

/// Train = [series.start, train_end), test = [train_end, test_end). Rows at or
/// after test_end are excluded. No shuffling.
std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec);

}  // namespace rescast
