#include "rescast/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

namespace {

SinCos polar(double position, double period) {
    const double angle = 2.0 * std::numbers::pi * position / period;
    return SinCos{std::sin(angle), std::cos(angle)};
}

}  // namespace

std::map<std::string, SinCos> encode_cyclical(UtcHour t) {
    const CivilDate d = t.date();
    std::map<std::string, SinCos> out;
    out["hour"] = polar(t.hour_of_day(), 24.0);
    out["day_of_week"] = polar(t.day_of_week(), 7.0);
    out["day_of_month"] = polar(d.day - 1, days_in_month(d.year, d.month));
    out["day_of_year"] = polar(t.day_of_year() - 1, is_leap_year(d.year) ? 366.0 : 365.0);
    out["month"] = polar(d.month - 1, 12.0);
    return out;
}

std::vector<std::string> FeatureSpec::weather_vars_for(EnergyType type) {
    if (type == EnergyType::solar) return {"temperature", "humidity", "visibility", "wind_speed"};
    return {"gust", "wind_speed"};
}

namespace {

std::string offset_name(const std::string& var, int offset) {
    if (offset == 0) return var + "_0";
    if (offset < 0) return var + "_m" + std::to_string(-offset);
    return var + "_p" + std::to_string(offset);
}

const int kBaseOffsets[] = {-24, -12, -6, -3, -1, 1, 3, 6, 12, 24};

}  // namespace

FeatureSpec FeatureSpec::canonical(EnergyType type, std::size_t target_width) {
    FeatureSpec spec;
    const auto vars = weather_vars_for(type);
    for (const auto& var : vars)
        for (int off : kBaseOffsets) spec.weather_cols.push_back({var, off});

    // Remaining offsets in nearest-to-zero order, negative before positive.
    std::vector<int> extras;
    for (int off = -24; off <= 24; ++off)
        if (std::find(std::begin(kBaseOffsets), std::end(kBaseOffsets), off) ==
            std::end(kBaseOffsets))
            extras.push_back(off);
    std::stable_sort(extras.begin(), extras.end(), [](int a, int b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return a < b;
    });

    for (int off : extras) {
        for (const auto& var : vars) {
            if (spec.width() >= target_width) return spec;
            spec.weather_cols.push_back({var, off});
        }
    }
    return spec;
}

FeatureSpec FeatureSpec::full_window(EnergyType type) {
    FeatureSpec spec;
    for (const auto& var : weather_vars_for(type))
        for (int off = -24; off <= 24; ++off) spec.weather_cols.push_back({var, off});
    return spec;
}

FeatureSpec FeatureSpec::raw_lags() {
    FeatureSpec spec;
    spec.cyclical = false;
    spec.rolling = false;
    return spec;
}

FeatureSpec FeatureSpec::none() {
    FeatureSpec spec;
    spec.cyclical = false;
    spec.rolling = false;
    spec.lag_min = 1;
    spec.lag_max = 0;
    return spec;
}

FeatureSpec FeatureSpec::decomposer_regressors(EnergyType type) {
    FeatureSpec spec;
    spec.cyclical = false;   // Fourier blocks own the calendar structure
    spec.lag_min = 48;
    spec.lag_max = 72;
    for (const auto& var : weather_vars_for(type)) {
        for (int off = -72; off <= -48; ++off) spec.weather_cols.push_back({var, off});
        for (int off = 1; off <= 24; ++off) spec.weather_cols.push_back({var, off});
    }
    return spec;
}

std::size_t FeatureSpec::width() const {
    std::size_t w = weather_cols.size();
    if (cyclical) w += 10;
    if (lag_max >= lag_min) w += static_cast<std::size_t>(lag_max - lag_min + 1);
    if (rolling) w += 6;
    return w;
}

std::vector<std::string> FeatureSpec::column_names() const {
    std::vector<std::string> names;
    names.reserve(width());
    if (cyclical) {
        for (const char* f : {"hour", "dow", "dom", "doy", "month"}) {
            names.push_back(std::string("cyc_") + f + "_sin");
            names.push_back(std::string("cyc_") + f + "_cos");
        }
    }
    for (int lag = lag_min; lag <= lag_max; ++lag) names.push_back("lag_" + std::to_string(lag));
    if (rolling)
        for (const char* s : {"min", "max", "mean", "skew", "var", "std"})
            names.push_back(std::string("roll_") + s);
    for (const auto& wc : weather_cols) names.push_back(offset_name(wc.var, wc.offset));
    return names;
}

std::size_t AccessAudit::energy_violations(int max_lag) const {
    std::size_t n = 0;
    for (const auto& r : energy_reads)
        if (r.accessed > r.target - max_lag) ++n;
    return n;
}

std::size_t AccessAudit::weather_violations(int max_lead) const {
    std::size_t n = 0;
    for (const auto& r : weather_reads)
        if (r.accessed > r.target + max_lead) ++n;
    return n;
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::size_t>& cols) const {
    FeatureMatrix out;
    out.n_rows = n_rows;
    out.n_cols = cols.size();
    out.target = target;
    out.row_times = row_times;
    out.col_names.reserve(cols.size());
    for (std::size_t c : cols) {
        if (c >= n_cols) throw Error(Errc::OutOfRange, "column index out of range");
        out.col_names.push_back(col_names[c]);
    }
    out.data.resize(n_rows * cols.size());
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double* src = data.data() + r * n_cols;
        double* dst = out.data.data() + r * cols.size();
        for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
    }
    return out;
}

std::vector<std::size_t> FeatureMatrix::indices_of(const std::vector<std::string>& names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        auto it = std::find(col_names.begin(), col_names.end(), name);
        if (it == col_names.end())
            throw Error(Errc::Config, "column '" + name + "' not in matrix");
        out.push_back(static_cast<std::size_t>(it - col_names.begin()));
    }
    return out;
}

double rolling_skewness(std::span<const double> window) {
    const std::size_t n = window.size();
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double v : window) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

bool lag_features(const TimeSeries& energy, std::size_t t, const FeatureSpec& spec,
                  std::span<double> out) {
    if (static_cast<std::int64_t>(t) - spec.lag_max < 0)
        throw Error(Errc::InsufficientHistory,
                    "lag window needs " + std::to_string(spec.lag_max) + " hours of history");
    bool valid = true;
    std::size_t j = 0;
    for (int lag = spec.lag_min; lag <= spec.lag_max; ++lag, ++j) {
        const double v = energy.values[t - static_cast<std::size_t>(lag)];
        out[j] = v;
        if (is_gap(v)) valid = false;
    }
    return valid;
}

RollingStats rolling_stats(const TimeSeries& energy, std::size_t t, const FeatureSpec& spec) {
    if (static_cast<std::int64_t>(t) - spec.rolling_from < 0)
        throw Error(Errc::InsufficientHistory, "rolling window needs " +
                                                   std::to_string(spec.rolling_from) +
                                                   " hours of history");
    const std::size_t begin = t - static_cast<std::size_t>(spec.rolling_from);
    const std::size_t end = t - static_cast<std::size_t>(spec.rolling_to) + 1;
    const std::size_t n = end - begin;

    double lo = energy.values[begin], hi = energy.values[begin], sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double v = energy.values[i];
        if (is_gap(v)) throw Error(Errc::GapInWindow, "gap inside rolling window");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    if (lo == hi) return RollingStats{lo, hi, lo, 0.0, 0.0, 0.0};

    const double mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = energy.values[i] - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return RollingStats{lo, hi, mean, skew, m2, std::sqrt(m2)};
}

RowAssembler::RowAssembler(const AlignedDataset& scaled, const FeatureSpec& spec)
    : data_(scaled), spec_(spec), width_(spec.width()) {
    weather_var_idx_.reserve(spec.weather_cols.size());
    for (const auto& wc : spec.weather_cols) {
        const std::int64_t idx = scaled.weather.find(wc.var);
        if (idx < 0)
            throw Error(Errc::Config, "weather variable '" + wc.var + "' missing from dataset");
        weather_var_idx_.push_back(static_cast<std::size_t>(idx));
    }
}

bool RowAssembler::assemble(std::size_t t, std::span<double> out, AccessAudit* audit) const {
    const auto& energy = data_.energy.values;
    const std::int64_t len = static_cast<std::int64_t>(energy.size());
    const std::int64_t ti = static_cast<std::int64_t>(t);
    const UtcHour target_time = data_.energy.time_at(t);
    if (audit) audit->target = target_time;

    std::size_t j = 0;
    if (spec_.cyclical) {
        const CivilDate d = target_time.date();
        const SinCos enc[5] = {
            polar(target_time.hour_of_day(), 24.0),
            polar(target_time.day_of_week(), 7.0),
            polar(d.day - 1, days_in_month(d.year, d.month)),
            polar(target_time.day_of_year() - 1, is_leap_year(d.year) ? 366.0 : 365.0),
            polar(d.month - 1, 12.0),
        };
        for (const auto& sc : enc) {
            out[j++] = sc.sin;
            out[j++] = sc.cos;
        }
    }

    if (spec_.lag_max >= spec_.lag_min) {
        if (ti - spec_.lag_max < 0) return false;
        for (int lag = spec_.lag_min; lag <= spec_.lag_max; ++lag) {
            const std::size_t src = t - static_cast<std::size_t>(lag);
            if (audit) audit->note_energy(data_.energy.time_at(src));
            const double v = energy[src];
            if (is_gap(v)) return false;
            out[j++] = v;
        }
    }

    if (spec_.rolling) {
        if (ti - spec_.rolling_from < 0) return false;
        const std::size_t begin = t - static_cast<std::size_t>(spec_.rolling_from);
        const std::size_t end = t - static_cast<std::size_t>(spec_.rolling_to) + 1;
        const std::size_t n = end - begin;
        double lo = energy[begin], hi = energy[begin], sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            if (audit) audit->note_energy(data_.energy.time_at(i));
            const double v = energy[i];
            if (is_gap(v)) return false;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        if (lo == hi) {
            out[j++] = lo; out[j++] = hi; out[j++] = lo;
            out[j++] = 0.0; out[j++] = 0.0; out[j++] = 0.0;
        } else {
            const double mean = sum / static_cast<double>(n);
            double m2 = 0.0, m3 = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const double d = energy[i] - mean;
                m2 += d * d;
                m3 += d * d * d;
            }
            m2 /= static_cast<double>(n);
            m3 /= static_cast<double>(n);
            out[j++] = lo;
            out[j++] = hi;
            out[j++] = mean;
            out[j++] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
            out[j++] = m2;
            out[j++] = std::sqrt(m2);
        }
    }

    for (std::size_t w = 0; w < spec_.weather_cols.size(); ++w) {
        const std::int64_t src = ti + spec_.weather_cols[w].offset;
        if (src < 0 || src >= len) return false;
        if (audit) audit->note_weather(data_.weather.start + src);
        const double v = data_.weather.columns[weather_var_idx_[w]][static_cast<std::size_t>(src)];
        if (is_gap(v)) return false;
        out[j++] = v;
    }
    return true;
}

FeatureMatrix build_matrix(const AlignedDataset& scaled, const FeatureSpec& spec) {
    return build_matrix(scaled, spec, scaled.energy.start, scaled.energy.end());
}

FeatureMatrix build_matrix(const AlignedDataset& scaled, const FeatureSpec& spec, UtcHour from,
                           UtcHour to, AccessAudit* audit, bool require_target) {
    FeatureMatrix m;
    m.col_names = spec.column_names();
    m.n_cols = m.col_names.size();

    const UtcHour lo = std::max(from, scaled.energy.start);
    const UtcHour hi = std::min(to, scaled.energy.end());
    std::vector<double> row(m.n_cols);
    RowAssembler assembler(scaled, spec);
    for (UtcHour t = lo; t < hi; t += 1) {
        const std::size_t idx = static_cast<std::size_t>(t - scaled.energy.start);
        const double y = scaled.energy.values[idx];
        if (require_target && is_gap(y)) continue;
        if (!assembler.assemble(idx, row, audit)) continue;
        m.data.insert(m.data.end(), row.begin(), row.end());
        m.target.push_back(y);
        m.row_times.push_back(t);
        ++m.n_rows;
    }
    if (m.n_rows == 0 && require_target)
        throw Error(Errc::EmptyMatrix, "no valid feature rows in [" + to_iso_string(from) + ", " +
                                           to_iso_string(to) + ")");
    return m;
}

namespace {
void append_num(std::string& line, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, p);
}
}  // namespace

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m) {
    std::string line = "timestamp,target";
    for (const auto& n : m.col_names) line += "," + n;
    out << line << '\n';
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        line = to_iso_string(m.row_times[r]);
        line += ',';
        append_num(line, m.target[r]);
        for (double v : m.row(r)) {
            line += ',';
            append_num(line, v);
        }
        out << line << '\n';
    }
}

std::string feature_spec_to_json(const FeatureSpec& spec) {
    nlohmann::json j;
    j["cyclical"] = spec.cyclical;
    j["lag_min"] = spec.lag_min;
    j["lag_max"] = spec.lag_max;
    j["rolling"] = spec.rolling;
    j["rolling_from"] = spec.rolling_from;
    j["rolling_to"] = spec.rolling_to;
    auto& cols = j["weather_cols"] = nlohmann::json::array();
    for (const auto& wc : spec.weather_cols) cols.push_back({{"var", wc.var}, {"offset", wc.offset}});
    return j.dump(2);
}

FeatureSpec feature_spec_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    FeatureSpec spec;
    spec.cyclical = j.at("cyclical").get<bool>();
    spec.lag_min = j.at("lag_min").get<int>();
    spec.lag_max = j.at("lag_max").get<int>();
    spec.rolling = j.at("rolling").get<bool>();
    spec.rolling_from = j.at("rolling_from").get<int>();
    spec.rolling_to = j.at("rolling_to").get<int>();
    spec.weather_cols.clear();
    for (const auto& wc : j.at("weather_cols"))
        spec.weather_cols.push_back({wc.at("var").get<std::string>(), wc.at("offset").get<int>()});
    return spec;
}

}  // namespace rescast
