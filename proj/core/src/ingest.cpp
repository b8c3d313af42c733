#include "rescast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "rescast/errors.hpp"
#include "rescast/logging.hpp"

namespace rescast {

EnergyType energy_type_from_string(const std::string& s) {
    if (s == "solar") return EnergyType::solar;
    if (s == "wind") return EnergyType::wind;
    throw Error(Errc::Config, "unknown energy type '" + s + "' (expected solar|wind)");
}

std::int64_t WeatherFrame::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<std::int64_t>(i);
    return -1;
}

WeatherFrame WeatherFrame::slice(UtcHour from, UtcHour to) const {
    if (from < start || to > end() || from > to)
        throw Error(Errc::OutOfRange, "weather slice outside frame span");
    WeatherFrame out;
    out.start = from;
    out.names = names;
    out.columns.reserve(columns.size());
    for (const auto& col : columns)
        out.columns.emplace_back(col.begin() + (from - start), col.begin() + (to - start));
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t begin = 0;
    while (true) {
        std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            cells.emplace_back(line.substr(begin));
            break;
        }
        cells.emplace_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
        cells.back().pop_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    if (cell.empty()) return kGap;
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || p != cell.data() + cell.size())
        throw Error(Errc::Parse,
                    "line " + std::to_string(line_no) + ": bad numeric cell '" + cell + "'");
    return v;
}

struct ParsedTable {
    std::vector<std::string> header;  // minus the timestamp column
    // Sorted by time; duplicates already resolved last-wins.
    std::map<std::int64_t, std::vector<double>> rows;
};

ParsedTable parse_table(std::istream& source) {
    ParsedTable table;
    std::string line;
    if (!std::getline(source, line)) throw Error(Errc::Parse, "empty input, header row required");
    auto header = split_line(line);
    if (header.empty() || header[0] != "timestamp")
        throw Error(Errc::Parse, "line 1: first header column must be 'timestamp'");
    if (header.size() < 2) throw Error(Errc::Parse, "line 1: no value columns");
    table.header.assign(header.begin() + 1, header.end());

    std::set<std::string> seen(table.header.begin(), table.header.end());
    if (seen.size() != table.header.size())
        throw Error(Errc::Parse, "line 1: duplicate column names");

    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " cells, got " +
                                         std::to_string(cells.size()));
        UtcHour t;
        bool on_hour = true;
        if (!parse_iso_hour(cells[0], t, on_hour)) {
            if (!on_hour)
                throw Error(Errc::NonHourly, "line " + std::to_string(line_no) +
                                                 ": timestamp '" + cells[0] +
                                                 "' not on the hour");
            throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": bad timestamp '" +
                                         cells[0] + "'");
        }
        std::vector<double> row(cells.size() - 1);
        for (std::size_t i = 1; i < cells.size(); ++i) row[i - 1] = parse_cell(cells[i], line_no);
        // Revisions supersede earlier rows: last wins.
        if (!table.rows.insert_or_assign(t.hours_since_epoch(), std::move(row)).second)
            log_debug("duplicate timestamp " + cells[0] + " at line " + std::to_string(line_no) +
                      ", keeping the later row");
    }
    if (table.rows.empty()) throw Error(Errc::Parse, "no data rows");
    return table;
}

}  // namespace

TimeSeries parse_generation_csv(std::istream& source, const std::string& column) {
    ParsedTable table = parse_table(source);
    auto it = std::find(table.header.begin(), table.header.end(), column);
    if (it == table.header.end())
        throw Error(Errc::Parse, "column '" + column + "' not present in generation CSV");
    const std::size_t ci = static_cast<std::size_t>(it - table.header.begin());

    const std::int64_t first = table.rows.begin()->first;
    const std::int64_t last = table.rows.rbegin()->first;
    TimeSeries out;
    out.start = UtcHour(first);
    out.name = column;
    out.unit = "MW";
    out.values.assign(static_cast<std::size_t>(last - first + 1), kGap);
    for (const auto& [hour, row] : table.rows) out.values[hour - first] = row[ci];
    return out;
}

WeatherFrame parse_weather_csv(std::istream& source) {
    ParsedTable table = parse_table(source);
    const std::int64_t first = table.rows.begin()->first;
    const std::int64_t last = table.rows.rbegin()->first;
    const std::size_t len = static_cast<std::size_t>(last - first + 1);

    WeatherFrame out;
    out.start = UtcHour(first);
    out.names = table.header;
    out.columns.assign(out.names.size(), std::vector<double>(len, kGap));
    for (const auto& [hour, row] : table.rows)
        for (std::size_t c = 0; c < row.size(); ++c) out.columns[c][hour - first] = row[c];
    return out;
}

namespace {

/// Bridges gaps of at most max_fill hours with the last present value.
/// Head gaps are never filled. Returns the residual gap count.
std::size_t forward_fill(std::vector<double>& v, int max_fill) {
    std::size_t gaps = 0;
    std::int64_t last_present = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_gap(v[i])) {
            last_present = static_cast<std::int64_t>(i);
            continue;
        }
        // Run of gaps starting at i.
        std::size_t j = i;
        while (j < v.size() && is_gap(v[j])) ++j;
        const std::size_t run = j - i;
        if (last_present >= 0 && run <= static_cast<std::size_t>(max_fill)) {
            std::fill(v.begin() + i, v.begin() + j, v[last_present]);
        } else {
            gaps += run;
        }
        i = j - 1;
    }
    return gaps;
}

}  // namespace

AlignedDataset align(const TimeSeries& energy, const WeatherFrame& weather,
                     const GapPolicy& policy) {
    const UtcHour from = std::max(energy.start, weather.start);
    const UtcHour to = std::min(energy.end(), weather.end());
    if (from >= to)
        throw Error(Errc::NoOverlap, "energy span " + to_iso_string(energy.start) + ".." +
                                         to_iso_string(energy.end()) + " and weather span " +
                                         to_iso_string(weather.start) + ".." +
                                         to_iso_string(weather.end()) + " do not overlap");

    AlignedDataset out;
    out.energy = energy.slice(from, to);
    out.weather = weather.slice(from, to);

    const double len = static_cast<double>(out.energy.size());
    const std::size_t energy_gaps = forward_fill(out.energy.values, policy.max_fill);
    if (static_cast<double>(energy_gaps) / len > policy.max_gap_fraction)
        throw Error(Errc::ExcessiveGaps, "energy series '" + energy.name + "' keeps " +
                                             std::to_string(energy_gaps) + "/" +
                                             std::to_string(out.energy.size()) +
                                             " gaps after filling");
    for (std::size_t c = 0; c < out.weather.columns.size(); ++c) {
        const std::size_t gaps = forward_fill(out.weather.columns[c], policy.max_fill);
        if (static_cast<double>(gaps) / len > policy.max_gap_fraction)
            throw Error(Errc::ExcessiveGaps, "weather variable '" + out.weather.names[c] +
                                                 "' keeps " + std::to_string(gaps) + "/" +
                                                 std::to_string(out.weather.size()) +
                                                 " gaps after filling");
    }
    return out;
}

namespace {

void append_double(std::string& line, double v) {
    if (is_gap(v)) return;  // gap = empty cell
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, p);
}

}  // namespace

void write_canonical_csv(std::ostream& out, const AlignedDataset& data) {
    std::string line = "timestamp," + data.energy.name;
    for (const auto& n : data.weather.names) line += "," + n;
    out << line << '\n';
    for (std::size_t i = 0; i < data.energy.size(); ++i) {
        line = to_iso_string(data.energy.time_at(i));
        line += ',';
        append_double(line, data.energy.values[i]);
        for (const auto& col : data.weather.columns) {
            line += ',';
            append_double(line, col[i]);
        }
        out << line << '\n';
    }
}

AlignedDataset read_canonical_csv(std::istream& in, const std::string& energy_column,
                                  EnergyType type) {
    // The canonical file is dense and aligned already; reuse the weather
    // parser and peel the energy column out of the frame.
    WeatherFrame all = parse_weather_csv(in);
    const std::int64_t ei = all.find(energy_column);
    if (ei < 0)
        throw Error(Errc::Parse, "canonical CSV lacks energy column '" + energy_column + "'");

    AlignedDataset out;
    out.energy_type = type;
    out.energy.start = all.start;
    out.energy.name = energy_column;
    out.energy.unit = "MW";
    out.energy.values = std::move(all.columns[static_cast<std::size_t>(ei)]);
    out.weather.start = all.start;
    for (std::size_t c = 0; c < all.names.size(); ++c) {
        if (static_cast<std::int64_t>(c) == ei) continue;
        out.weather.names.push_back(all.names[c]);
        out.weather.columns.push_back(std::move(all.columns[c]));
    }
    return out;
}

}  // namespace rescast
