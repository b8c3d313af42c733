#include "rescast/stad.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

std::vector<double> fourier_basis(double t_hours, double period_hours, int order) {
    if (period_hours <= 0.0) throw Error(Errc::Config, "Fourier period must be positive");
    if (order < 1) throw Error(Errc::Config, "Fourier order must be >= 1");
    const double phase = std::fmod(t_hours, period_hours) / period_hours;
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k) {
        const double angle = 2.0 * std::numbers::pi * k * phase;
        out.push_back(std::sin(angle));
        out.push_back(std::cos(angle));
    }
    return out;
}

std::vector<double> trend_basis(double t_hours, const std::vector<double>& changepoints) {
    std::vector<double> out;
    out.reserve(changepoints.size() + 2);
    out.push_back(1.0);
    out.push_back(t_hours);
    for (double c : changepoints) out.push_back(std::max(0.0, t_hours - c));
    return out;
}

namespace {

bool dayparts_partition(const std::vector<DaypartSpec>& parts) {
    if (parts.empty()) return true;
    int covered[24] = {};
    for (const auto& p : parts) {
        if (p.begin_hour < 0 || p.begin_hour > 23 || p.end_hour < 0 || p.end_hour > 24)
            return false;
        int h = p.begin_hour;
        do {
            ++covered[h];
            h = (h + 1) % 24;
        } while (h != p.end_hour % 24);
    }
    return std::all_of(std::begin(covered), std::end(covered), [](int c) { return c == 1; });
}

int daypart_index(const std::vector<DaypartSpec>& parts, unsigned hour) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& p = parts[i];
        const int h = static_cast<int>(hour);
        const bool in = p.begin_hour <= p.end_hour
                            ? (h >= p.begin_hour && h < p.end_hour)
                            : (h >= p.begin_hour || h < p.end_hour);
        if (in) return static_cast<int>(i);
    }
    return -1;
}

/// Column layout of the joint design matrix.
struct DesignLayout {
    std::size_t trend_cols = 0;  // 1 + 1 + changepoints
    std::vector<std::size_t> block_begin;
    std::size_t daypart_begin = 0, n_dayparts = 0;
    std::size_t holiday_begin = 0, n_holidays = 0;
    std::size_t regressor_begin = 0, n_regressors = 0;
    std::size_t total = 0;
};

DesignLayout make_layout(const StadConfig& cfg) {
    DesignLayout lay;
    lay.trend_cols = 2 + static_cast<std::size_t>(std::max(0, cfg.changepoints));
    std::size_t at = lay.trend_cols;
    for (const auto& b : cfg.blocks) {
        lay.block_begin.push_back(at);
        at += 2 * static_cast<std::size_t>(b.order);
    }
    lay.daypart_begin = at;
    lay.n_dayparts = cfg.dayparts.size();
    at += lay.n_dayparts;
    lay.holiday_begin = at;
    lay.n_holidays = cfg.holidays.size();
    at += lay.n_holidays;
    lay.regressor_begin = at;
    lay.n_regressors = cfg.regressor_names.size();
    at += lay.n_regressors;
    lay.total = at;
    return lay;
}

}  // namespace

double StadModel::trend_at(UtcHour t) const {
    const double dt = static_cast<double>(t - fit_start);
    double g = trend.intercept + trend.slope * dt;
    for (std::size_t j = 0; j < trend.deltas.size(); ++j) {
        const double c = static_cast<double>(trend.changepoint_times[j] - fit_start);
        g += trend.deltas[j] * std::max(0.0, dt - c);
    }
    return g;
}

double StadModel::block_at(UtcHour t, std::size_t block) const {
    const auto& b = config.blocks[block];
    const auto basis =
        fourier_basis(static_cast<double>(t.hours_since_epoch()), b.period_hours, b.order);
    double s = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) s += seasonal_weights[block][j] * basis[j];
    return s;
}

double StadModel::seasonal_at(UtcHour t) const {
    double s = 0.0;
    for (std::size_t b = 0; b < config.blocks.size(); ++b) s += block_at(t, b);
    if (!config.dayparts.empty()) {
        const int d = daypart_index(config.dayparts, t.hour_of_day());
        if (d >= 0) s += daypart_weights[static_cast<std::size_t>(d)];
    }
    return s;
}

double StadModel::holiday_at(UtcHour t) const {
    if (config.holidays.empty()) return 0.0;
    const CivilDate date = t.date();
    for (std::size_t j = 0; j < config.holidays.size(); ++j)
        if (config.holidays[j] == date) return holiday_weights[j];
    return 0.0;
}

double StadModel::regressors_at(std::span<const double> row) const {
    if (row.size() != regressor_weights.size())
        throw Error(Errc::MisalignedRegressors,
                    "regressor row width " + std::to_string(row.size()) + " vs model " +
                        std::to_string(regressor_weights.size()));
    double r = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) r += regressor_weights[j] * row[j];
    return r;
}

StadModel stad_fit(std::span<const UtcHour> times, std::span<const double> y,
                   const FeatureMatrix* regressors, const StadConfig& cfg) {
    if (times.size() < 2) throw Error(Errc::EmptySeries, "stad_fit needs at least two samples");
    if (times.size() != y.size())
        throw Error(Errc::MisalignedRegressors, "times and values differ in length");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw Error(Errc::OutOfRange, "sample times must be strictly increasing");
    for (double v : y)
        if (is_gap(v)) throw Error(Errc::GapInWindow, "stad_fit target contains gaps");
    if (!dayparts_partition(cfg.dayparts))
        throw Error(Errc::Config, "daypart ranges must partition the 24 hours");
    if (cfg.trend_reg < 0 || cfg.seasonal_reg < 0 || cfg.regressor_reg < 0)
        throw Error(Errc::Config, "penalties must be >= 0");

    std::vector<std::size_t> regressor_cols;
    if (!cfg.regressor_names.empty()) {
        if (regressors == nullptr)
            throw Error(Errc::MisalignedRegressors, "config names regressors but none given");
        if (regressors->n_rows != times.size())
            throw Error(Errc::MisalignedRegressors,
                        "regressor rows " + std::to_string(regressors->n_rows) + " vs samples " +
                            std::to_string(times.size()));
        for (std::size_t i = 0; i < times.size(); ++i)
            if (regressors->row_times[i] != times[i])
                throw Error(Errc::MisalignedRegressors, "regressor row times differ from samples");
        regressor_cols = regressors->indices_of(cfg.regressor_names);
    }

    const std::size_t n = times.size();
    const DesignLayout lay = make_layout(cfg);
    const UtcHour t0 = times.front();
    const double span_hours = static_cast<double>(times.back() - t0);

    // Changepoints sit uniformly over the first 80% of the span; the trend
    // time axis is rescaled to [0, 1] for conditioning and mapped back after
    // the solve.
    const int m = std::max(0, cfg.changepoints);
    std::vector<double> cp_scaled(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j)
        cp_scaled[static_cast<std::size_t>(j - 1)] = 0.8 * j / static_cast<double>(m);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(lay.total));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ie = static_cast<Eigen::Index>(i);
        const UtcHour t = times[i];
        const double tau = span_hours > 0 ? static_cast<double>(t - t0) / span_hours : 0.0;

        A(ie, 0) = 1.0;
        A(ie, 1) = tau;
        for (int j = 0; j < m; ++j)
            A(ie, 2 + j) = std::max(0.0, tau - cp_scaled[static_cast<std::size_t>(j)]);

        for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
            const auto basis = fourier_basis(static_cast<double>(t.hours_since_epoch()),
                                             cfg.blocks[b].period_hours, cfg.blocks[b].order);
            for (std::size_t j = 0; j < basis.size(); ++j)
                A(ie, static_cast<Eigen::Index>(lay.block_begin[b] + j)) = basis[j];
        }

        if (lay.n_dayparts > 0) {
            const int d = daypart_index(cfg.dayparts, t.hour_of_day());
            A(ie, static_cast<Eigen::Index>(lay.daypart_begin + static_cast<std::size_t>(d))) = 1.0;
        }

        if (lay.n_holidays > 0) {
            const CivilDate date = t.date();
            for (std::size_t j = 0; j < cfg.holidays.size(); ++j)
                if (cfg.holidays[j] == date)
                    A(ie, static_cast<Eigen::Index>(lay.holiday_begin + j)) = 1.0;
        }

        for (std::size_t j = 0; j < regressor_cols.size(); ++j)
            A(ie, static_cast<Eigen::Index>(lay.regressor_begin + j)) =
                regressors->at(i, regressor_cols[j]);
    }

    Eigen::VectorXd penalties = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.total));
    for (std::size_t j = 2; j < lay.trend_cols; ++j)
        penalties[static_cast<Eigen::Index>(j)] = cfg.trend_reg;
    for (std::size_t j = lay.trend_cols; j < lay.daypart_begin + lay.n_dayparts + lay.n_holidays;
         ++j)
        penalties[static_cast<Eigen::Index>(j)] = cfg.seasonal_reg;
    for (std::size_t j = 0; j < lay.n_regressors; ++j)
        penalties[static_cast<Eigen::Index>(lay.regressor_begin + j)] = cfg.regressor_reg;

    Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) yv[static_cast<Eigen::Index>(i)] = y[i];

    Eigen::MatrixXd G = A.transpose() * A;
    G.diagonal() += penalties;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    const bool unpenalized = cfg.trend_reg == 0 && cfg.seasonal_reg == 0 && cfg.regressor_reg == 0;
    if (unpenalized &&
        (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12))
        throw Error(Errc::SingularSystem, "design is rank deficient and all penalties are zero");
    const Eigen::VectorXd w = ldlt.solve(A.transpose() * yv);

    StadModel model;
    model.config = cfg;
    model.fit_start = t0;
    model.fit_end = times.back() + 1;
    model.trend.intercept = w[0];
    model.trend.slope = span_hours > 0 ? w[1] / span_hours : 0.0;
    for (int j = 0; j < m; ++j) {
        model.trend.changepoint_times.push_back(
            t0 + static_cast<std::int64_t>(std::llround(cp_scaled[static_cast<std::size_t>(j)] *
                                                        span_hours)));
        model.trend.deltas.push_back(span_hours > 0 ? w[2 + j] / span_hours : 0.0);
    }
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
        std::vector<double> bw(2 * static_cast<std::size_t>(cfg.blocks[b].order));
        for (std::size_t j = 0; j < bw.size(); ++j)
            bw[j] = w[static_cast<Eigen::Index>(lay.block_begin[b] + j)];
        model.seasonal_weights.push_back(std::move(bw));
    }
    for (std::size_t j = 0; j < lay.n_dayparts; ++j)
        model.daypart_weights.push_back(w[static_cast<Eigen::Index>(lay.daypart_begin + j)]);
    for (std::size_t j = 0; j < lay.n_holidays; ++j)
        model.holiday_weights.push_back(w[static_cast<Eigen::Index>(lay.holiday_begin + j)]);
    for (std::size_t j = 0; j < lay.n_regressors; ++j)
        model.regressor_weights.push_back(w[static_cast<Eigen::Index>(lay.regressor_begin + j)]);
    return model;
}

StadModel stad_fit(const TimeSeries& y, const StadConfig& cfg) {
    std::vector<UtcHour> times;
    times.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (is_gap(y.values[i]))
            throw Error(Errc::GapInWindow, "series form of stad_fit requires a gap-free span");
        times.push_back(y.time_at(i));
    }
    return stad_fit(times, y.values, nullptr, cfg);
}

namespace {

/// Hinge trend exactly as fitted: note the changepoint times are stored on
/// the hour grid, so extrapolation continues the final slope.
TimeSeries make_stream(UtcHour from, std::size_t len, const char* name) {
    TimeSeries s;
    s.start = from;
    s.name = name;
    s.unit = "scaled";
    s.values.assign(len, kGap);
    return s;
}

}  // namespace

Decomposition stad_components(const StadModel& m, UtcHour from, UtcHour to,
                              const FeatureMatrix* regressors, const TimeSeries* actuals) {
    if (from >= to) throw Error(Errc::OutOfRange, "empty component range");
    const bool uses_regressors = !m.regressor_weights.empty();
    if (uses_regressors && regressors == nullptr)
        throw Error(Errc::MissingRegressors, "model was fitted with external regressors");

    std::vector<std::size_t> reg_cols;
    if (uses_regressors) reg_cols = regressors->indices_of(m.config.regressor_names);

    const std::size_t len = static_cast<std::size_t>(to - from);
    Decomposition d{make_stream(from, len, "trend"),    make_stream(from, len, "seasonal"),
                    make_stream(from, len, "holiday"),  make_stream(from, len, "regressor"),
                    make_stream(from, len, "residual"), make_stream(from, len, "fitted")};

    // Row lookup by hour for the regressor matrix.
    std::size_t reg_cursor = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const UtcHour t = from + static_cast<std::int64_t>(i);
        const double g = m.trend_at(t);
        const double s = m.seasonal_at(t);
        const double h = m.holiday_at(t);
        d.trend.values[i] = g;
        d.seasonal.values[i] = s;
        d.holiday.values[i] = h;

        double r = 0.0;
        bool have_row = true;
        if (uses_regressors) {
            while (reg_cursor < regressors->n_rows && regressors->row_times[reg_cursor] < t)
                ++reg_cursor;
            if (reg_cursor < regressors->n_rows && regressors->row_times[reg_cursor] == t) {
                const auto row = regressors->row(reg_cursor);
                r = 0.0;
                for (std::size_t j = 0; j < reg_cols.size(); ++j)
                    r += m.regressor_weights[j] * row[reg_cols[j]];
            } else {
                have_row = false;
            }
        }
        if (have_row) {
            d.regressor.values[i] = r;
            d.fitted.values[i] = g + s + h + r;
            if (actuals != nullptr) {
                const std::int64_t ai = actuals->index_of(t);
                if (ai >= 0 && !is_gap(actuals->values[static_cast<std::size_t>(ai)]))
                    d.residual.values[i] =
                        actuals->values[static_cast<std::size_t>(ai)] - d.fitted.values[i];
            }
        }
    }
    return d;
}

TimeSeries deseasonalize(const TimeSeries& y, const StadModel& m) {
    TimeSeries out = y;
    out.name = y.name + "_deseasoned";
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (is_gap(out.values[i])) continue;
        const UtcHour t = y.time_at(i);
        double sub = m.seasonal_at(t) + m.holiday_at(t);
        if (m.config.subtract_trend) sub += m.trend_at(t);
        out.values[i] -= sub;
    }
    return out;
}

namespace {
void append_cell(std::string& line, double v) {
    line += ',';
    if (is_gap(v)) return;
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, p);
}
}  // namespace

void write_decomposition_csv(std::ostream& out, const Decomposition& d) {
    out << "timestamp,trend,seasonal,holiday,regressor,residual,fitted\n";
    for (std::size_t i = 0; i < d.trend.size(); ++i) {
        std::string line = to_iso_string(d.trend.time_at(i));
        append_cell(line, d.trend.values[i]);
        append_cell(line, d.seasonal.values[i]);
        append_cell(line, d.holiday.values[i]);
        append_cell(line, d.regressor.values[i]);
        append_cell(line, d.residual.values[i]);
        append_cell(line, d.fitted.values[i]);
        out << line << '\n';
    }
}

std::string stad_to_json(const StadModel& m) {
    nlohmann::json j;
    j["version"] = 1;
    j["fit_start"] = to_iso_string(m.fit_start);
    j["fit_end"] = to_iso_string(m.fit_end);

    nlohmann::json cfg;
    auto& blocks = cfg["blocks"] = nlohmann::json::array();
    for (const auto& b : m.config.blocks)
        blocks.push_back({{"name", b.name}, {"period_hours", b.period_hours}, {"order", b.order}});
    auto& parts = cfg["dayparts"] = nlohmann::json::array();
    for (const auto& p : m.config.dayparts)
        parts.push_back({{"name", p.name}, {"begin", p.begin_hour}, {"end", p.end_hour}});
    cfg["changepoints"] = m.config.changepoints;
    cfg["trend_reg"] = m.config.trend_reg;
    cfg["seasonal_reg"] = m.config.seasonal_reg;
    cfg["regressor_reg"] = m.config.regressor_reg;
    cfg["regressor_names"] = m.config.regressor_names;
    auto& hols = cfg["holidays"] = nlohmann::json::array();
    for (const auto& h : m.config.holidays) hols.push_back(to_iso_string(h));
    cfg["subtract_trend"] = m.config.subtract_trend;
    j["config"] = cfg;

    nlohmann::json trend;
    trend["intercept"] = m.trend.intercept;
    trend["slope_per_hour"] = m.trend.slope;
    auto& cps = trend["changepoints"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.trend.deltas.size(); ++i)
        cps.push_back({{"time", to_iso_string(m.trend.changepoint_times[i])},
                       {"delta_per_hour", m.trend.deltas[i]}});
    j["trend"] = trend;

    j["seasonal_weights"] = m.seasonal_weights;
    j["daypart_weights"] = m.daypart_weights;
    j["holiday_weights"] = m.holiday_weights;
    j["regressor_weights"] = m.regressor_weights;
    return j.dump(2);
}

StadModel stad_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    StadModel m;
    bool on_hour = true;
    if (!parse_iso_hour(j.at("fit_start").get<std::string>(), m.fit_start, on_hour) ||
        !parse_iso_hour(j.at("fit_end").get<std::string>(), m.fit_end, on_hour))
        throw Error(Errc::Parse, "bad fit span timestamps in model JSON");

    const auto& cfg = j.at("config");
    m.config.blocks.clear();
    for (const auto& b : cfg.at("blocks"))
        m.config.blocks.push_back({b.at("name").get<std::string>(),
                                   b.at("period_hours").get<double>(), b.at("order").get<int>()});
    m.config.dayparts.clear();
    for (const auto& p : cfg.at("dayparts"))
        m.config.dayparts.push_back(
            {p.at("name").get<std::string>(), p.at("begin").get<int>(), p.at("end").get<int>()});
    m.config.changepoints = cfg.at("changepoints").get<int>();
    m.config.trend_reg = cfg.at("trend_reg").get<double>();
    m.config.seasonal_reg = cfg.at("seasonal_reg").get<double>();
    m.config.regressor_reg = cfg.at("regressor_reg").get<double>();
    m.config.regressor_names = cfg.at("regressor_names").get<std::vector<std::string>>();
    m.config.holidays.clear();
    for (const auto& h : cfg.at("holidays")) {
        CivilDate d;
        if (!parse_civil_date(h.get<std::string>(), d))
            throw Error(Errc::Parse, "bad holiday date in model JSON");
        m.config.holidays.push_back(d);
    }
    m.config.subtract_trend = cfg.at("subtract_trend").get<bool>();

    const auto& trend = j.at("trend");
    m.trend.intercept = trend.at("intercept").get<double>();
    m.trend.slope = trend.at("slope_per_hour").get<double>();
    for (const auto& cp : trend.at("changepoints")) {
        UtcHour t;
        if (!parse_iso_hour(cp.at("time").get<std::string>(), t, on_hour))
            throw Error(Errc::Parse, "bad changepoint time in model JSON");
        m.trend.changepoint_times.push_back(t);
        m.trend.deltas.push_back(cp.at("delta_per_hour").get<double>());
    }
    m.seasonal_weights = j.at("seasonal_weights").get<std::vector<std::vector<double>>>();
    m.daypart_weights = j.at("daypart_weights").get<std::vector<double>>();
    m.holiday_weights = j.at("holiday_weights").get<std::vector<double>>();
    m.regressor_weights = j.at("regressor_weights").get<std::vector<double>>();
    return m;
}

}  // namespace rescast
