#include "rescast/series.hpp"

#include <algorithm>

#include "rescast/errors.hpp"

namespace rescast {

TimeSeries TimeSeries::slice(UtcHour from, UtcHour to) const {
    if (from < start || to > end() || from > to)
        throw Error(Errc::OutOfRange, "slice [" + to_iso_string(from) + ", " + to_iso_string(to) +
                                          ") outside series span");
    TimeSeries out;
    out.start = from;
    out.name = name;
    out.unit = unit;
    out.values.assign(values.begin() + (from - start), values.begin() + (to - start));
    return out;
}

std::size_t TimeSeries::present_count() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](double v) { return !is_gap(v); }));
}

ScalerParams minmax_fit(const TimeSeries& series) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    for (double v : series.values) {
        if (is_gap(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++n;
    }
    if (n == 0) throw Error(Errc::EmptySeries, "minmax_fit on series with no present values");
    if (n < 2 || hi == lo)
        throw Error(Errc::ConstantSeries,
                    "minmax_fit needs at least two present values with max > min (series '" +
                        series.name + "')");
    return ScalerParams{lo, hi};
}

TimeSeries minmax_transform(const TimeSeries& series, const ScalerParams& p) {
    TimeSeries out = series;
    const double range = p.max - p.min;
    for (double& v : out.values)
        if (!is_gap(v)) v = (v - p.min) / range;
    out.unit = "scaled";
    return out;
}

TimeSeries minmax_inverse(const TimeSeries& series, const ScalerParams& p) {
    TimeSeries out = series;
    const double range = p.max - p.min;
    for (double& v : out.values)
        if (!is_gap(v)) v = v * range + p.min;
    out.unit = "";
    return out;
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec) {
    if (spec.train_end >= spec.test_end)
        throw Error(Errc::OutOfRange, "train_end must precede test_end");
    if (spec.train_end <= series.start)
        throw Error(Errc::EmptyTrain, "train_end at or before series start");
    if (spec.test_end > series.end())
        throw Error(Errc::OutOfRange, "test_end past series end " + to_iso_string(series.end()));
    return {series.slice(series.start, spec.train_end),
            series.slice(spec.train_end, spec.test_end)};
}

}  // namespace rescast
