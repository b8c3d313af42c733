#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rescast/config.hpp"
#include "rescast/errors.hpp"
#include "rescast/evaluation.hpp"
#include "rescast/forecasters.hpp"
#include "rescast/ingest.hpp"
#include "rescast/logging.hpp"

namespace fs = std::filesystem;
using namespace rescast;

namespace {

// Stable exit codes: 0 ok, 1 parse, 2 align, 3 fit, 4 evaluate.
constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitAlign = 2;
constexpr int kExitFit = 3;
constexpr int kExitEvaluate = 4;

int classify(const Error& e) {
    switch (e.code()) {
        case Errc::NoOverlap:
        case Errc::ExcessiveGaps:
            return kExitAlign;
        case Errc::EmptyRun:
            return kExitEvaluate;
        case Errc::Parse:
        case Errc::NonHourly:
        case Errc::Config:
        case Errc::Io:
            return kExitParse;
        default:
            return kExitFit;
    }
}

/// Guards an artifact directory against concurrent invocations.
class LockFile {
public:
    explicit LockFile(const fs::path& dir) : path_(dir / ".lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.string().c_str(), "wx");
        if (f == nullptr)
            throw Error(Errc::Io, "artifact directory is locked by another run (" +
                                      path_.string() + ")");
        std::fclose(f);
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    fs::path path_;
};

class StageTimer {
public:
    void start(const std::string& name) {
        stage_ = name;
        begin_ = std::chrono::steady_clock::now();
        log_info("stage " + name + " ...");
    }
    void finish() {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - begin_)
                            .count();
        log_info("stage " + stage_ + " done in " + std::to_string(ms) + " ms");
        lines_ += stage_ + "," + std::to_string(ms) + "\n";
    }
    const std::string& csv() const { return lines_; }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point begin_;
    std::string lines_ = "stage,duration_ms\n";
};

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return load_run_config(path);
}

AlignedDataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.empty())
        throw Error(Errc::Config, "config field 'dataset' (canonical CSV path) is required");
    std::ifstream in(cfg.dataset);
    if (!in) throw Error(Errc::Io, "cannot open dataset " + cfg.dataset);
    return read_canonical_csv(in, cfg.resolved_energy_column(), cfg.energy_type);
}

std::string model_dir_name(const std::string& model, int n_days) {
    if (model == "persistence") return "persistence_t" + std::to_string(n_days);
    return model_kind_from_string(model) == ModelKind::ml_direct
               ? "ml_direct"
               : (model_kind_from_string(model) == ModelKind::stad_direct ? "stad_direct"
                                                                          : "hybrid");
}

int cmd_ingest(const RunConfig& cfg, const std::string& out_path) {
    StageTimer timer;
    timer.start("parse");
    if (cfg.generation_csv.empty() || cfg.weather_csv.empty())
        throw Error(Errc::Config, "--generation and --weather (or config fields) are required");
    std::ifstream gen(cfg.generation_csv);
    if (!gen) throw Error(Errc::Io, "cannot open " + cfg.generation_csv);
    std::ifstream wx(cfg.weather_csv);
    if (!wx) throw Error(Errc::Io, "cannot open " + cfg.weather_csv);
    const TimeSeries energy = parse_generation_csv(gen, cfg.resolved_energy_column());
    const WeatherFrame weather = parse_weather_csv(wx);
    timer.finish();

    timer.start("align");
    const AlignedDataset aligned = align(energy, weather, cfg.gaps);
    timer.finish();

    const fs::path out = out_path.empty() ? fs::path(cfg.dataset) : fs::path(out_path);
    if (out.empty()) throw Error(Errc::Config, "--out (or config 'dataset') is required");
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream os(out);
    if (!os) throw Error(Errc::Io, "cannot write " + out.string());
    write_canonical_csv(os, aligned);

    std::printf("wrote %s: %zu hours, %s..%s\n", out.string().c_str(), aligned.energy.size(),
                to_iso_string(aligned.energy.start).c_str(),
                to_iso_string(aligned.energy.end()).c_str());
    std::printf("gap summary: %s %zu/%zu\n", aligned.energy.name.c_str(),
                aligned.energy.gap_count(), aligned.energy.size());
    for (std::size_t c = 0; c < aligned.weather.names.size(); ++c) {
        std::size_t gaps = 0;
        for (double v : aligned.weather.columns[c])
            if (is_gap(v)) ++gaps;
        std::printf("gap summary: %s %zu/%zu\n", aligned.weather.names[c].c_str(), gaps,
                    aligned.weather.size());
    }
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::string& model, int n_days) {
    LockFile lock(cfg.artifacts_dir);
    const AlignedDataset data = load_dataset(cfg);

    StageTimer timer;
    timer.start("split");
    const AlignedDataset train = slice_dataset(data, data.energy.start, cfg.split.train_end);
    timer.finish();

    Forecaster f;
    timer.start("fit " + model);
    try {
        if (model == "persistence")
            f = fit_persistence(train, n_days, cfg.pipeline);
        else if (model_kind_from_string(model) == ModelKind::ml_direct)
            f = fit_ml_direct(train, cfg.pipeline);
        else if (model_kind_from_string(model) == ModelKind::stad_direct)
            f = fit_stad_direct(train, cfg.pipeline);
        else
            f = fit_hybrid(train, cfg.pipeline);
    } catch (const Error& e) {
        std::fprintf(stderr, "fitting failed: %s\n", e.what());
        return kExitFit;
    }
    timer.finish();

    const fs::path dir = fs::path(cfg.artifacts_dir) / f.model_id;
    save_bundle(dir, f);
    std::ofstream log(dir / "train_log.csv");
    log << timer.csv();
    std::printf("saved bundle %s\n", dir.string().c_str());
    return kExitOk;
}

std::vector<fs::path> bundle_dirs(const fs::path& artifacts) {
    std::vector<fs::path> dirs;
    if (!fs::exists(artifacts)) return dirs;
    for (const auto& entry : fs::directory_iterator(artifacts))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

int cmd_forecast(const RunConfig& cfg, const std::string& model, int n_days,
                 const std::string& out_dir) {
    LockFile lock(cfg.artifacts_dir);
    const AlignedDataset data = load_dataset(cfg);
    const fs::path dir = fs::path(cfg.artifacts_dir) / model_dir_name(model, n_days);
    const Forecaster f = load_bundle(dir);

    const ForecastRun run = forecast(f, data, cfg.split.train_end, cfg.split.test_end);
    if (valid_hours(run) == 0)
        throw Error(Errc::EmptyRun, "no forecastable hours in the test span");

    const fs::path runs = out_dir.empty() ? fs::path(cfg.artifacts_dir) / "runs" : fs::path(out_dir);
    fs::create_directories(runs);
    std::ofstream os(runs / (f.model_id + ".csv"));
    write_run_csv(os, run);
    std::printf("%s: %zu predicted hours, %zu skipped\n", f.model_id.c_str(), valid_hours(run),
                run.skipped);
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& out_dir) {
    LockFile lock(cfg.artifacts_dir);
    const AlignedDataset data = load_dataset(cfg);
    const auto dirs = bundle_dirs(cfg.artifacts_dir);
    if (dirs.empty()) throw Error(Errc::Config, "no bundles under " + cfg.artifacts_dir);

    StageTimer timer;
    std::vector<ForecastRun> runs;
    for (const auto& dir : dirs) {
        const Forecaster f = load_bundle(dir);
        timer.start("forecast " + f.model_id);
        runs.push_back(forecast(f, data, cfg.split.train_end, cfg.split.test_end));
        timer.finish();
    }
    runs = restrict_to_common_support(std::move(runs));

    const fs::path out = out_dir.empty() ? fs::path(cfg.artifacts_dir) / "reports"
                                         : fs::path(out_dir);
    fs::create_directories(out);
    const fs::path runs_dir = fs::path(cfg.artifacts_dir) / "runs";
    fs::create_directories(runs_dir);

    std::vector<EvaluationReport> reports;
    for (const auto& run : runs) {
        reports.push_back(evaluate(run));  // EmptyRun -> exit 4
        std::ofstream rs(runs_dir / (run.model_id + ".csv"));
        write_run_csv(rs, run);
        std::ofstream rj(out / ("report_" + run.model_id + ".json"));
        rj << report_to_json(reports.back()) << '\n';
    }

    const auto table = compare(reports);
    std::ofstream cc(out / "comparison.csv");
    write_comparison_csv(cc, table);
    std::ofstream cj(out / "comparison.json");
    cj << comparison_to_json(table) << '\n';

    // Fig-1-style heat map of the scaled generation over the whole span.
    TimeSeries scaled = minmax_transform(data.energy, minmax_fit(data.energy));
    const HeatmapMatrix hm = heatmap(scaled);
    std::ofstream hc(out / ("heatmap_" + std::string(to_string(cfg.energy_type)) + ".csv"));
    write_heatmap_csv(hc, hm);
    std::ofstream hs(out / ("heatmap_" + std::string(to_string(cfg.energy_type)) + ".svg"));
    write_heatmap_svg(hs, hm, std::string(to_string(cfg.energy_type)) + " generation");

    for (const auto& r : table)
        std::printf("%-16s mae=%.4f rmse=%.4f under10=%.1f%% over15=%.1f%% hours=%zu\n",
                    r.model_id.c_str(), r.mae, r.rmse, r.intervals.under_10, r.intervals.over_15,
                    r.n_hours);
    return kExitOk;
}

int cmd_report(const RunConfig& cfg, const std::string& out_dir) {
    const fs::path out = out_dir.empty() ? fs::path(cfg.artifacts_dir) / "reports"
                                         : fs::path(out_dir);
    if (!fs::exists(out)) throw Error(Errc::Io, "no reports directory " + out.string());

    std::vector<EvaluationReport> reports;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(out)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        reports.push_back(report_from_json(ss.str()));
    }
    if (reports.empty()) throw Error(Errc::Io, "no report_*.json files under " + out.string());

    const auto table = compare(reports);
    std::ofstream cc(out / "comparison.csv");
    write_comparison_csv(cc, table);
    std::ofstream cj(out / "comparison.json");
    cj << comparison_to_json(table) << '\n';

    const AlignedDataset data = load_dataset(cfg);
    TimeSeries scaled = minmax_transform(data.energy, minmax_fit(data.energy));
    const HeatmapMatrix hm = heatmap(scaled);
    std::ofstream hc(out / ("heatmap_" + std::string(to_string(cfg.energy_type)) + ".csv"));
    write_heatmap_csv(hc, hm);
    std::ofstream hs(out / ("heatmap_" + std::string(to_string(cfg.energy_type)) + ".svg"));
    write_heatmap_svg(hs, hm, std::string(to_string(cfg.energy_type)) + " generation");

    std::printf("comparison over %zu reports written to %s\n", table.size(), out.string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rescast - short-term renewable energy forecasting"};
    app.require_subcommand(1);

    std::string config_path, out_path, model = "hybrid", energy_type, gen_path, wx_path;
    int n_days = 2;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_fill;
    std::optional<double> max_gap_fraction;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--out", out_path, "output path override");
        cmd->add_option("--energy-type", energy_type, "solar|wind");
        cmd->add_option("--seed", seed, "RNG seed override");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "parse and align raw CSV files");
    add_common(ingest);
    ingest->add_option("--generation", gen_path, "generation CSV path");
    ingest->add_option("--weather", wx_path, "weather CSV path");
    ingest->add_option("--max-fill", max_fill, "forward-fill limit in hours");
    ingest->add_option("--max-gap-fraction", max_gap_fraction, "tolerated residual gap share");

    CLI::App* train = app.add_subcommand("train", "fit one model and save its bundle");
    add_common(train);
    train->add_option("--model", model, "persistence|ml|stad|hybrid");
    train->add_option("--n-days", n_days, "persistence horizon in days");

    CLI::App* fc = app.add_subcommand("forecast", "walk-forward run for one trained model");
    add_common(fc);
    fc->add_option("--model", model, "persistence|ml|stad|hybrid");
    fc->add_option("--n-days", n_days, "persistence horizon in days");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score every trained bundle");
    add_common(evaluate);

    CLI::App* report = app.add_subcommand("report", "regenerate comparison and heat maps");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config_or_default(config_path);
        if (!energy_type.empty()) {
            cfg.energy_type = energy_type_from_string(energy_type);
            cfg.pipeline = default_pipeline(cfg.energy_type, cfg.seed);
        }
        if (seed) {
            cfg.seed = *seed;
            cfg.pipeline.seed = *seed;
        }
        if (!gen_path.empty()) cfg.generation_csv = gen_path;
        if (!wx_path.empty()) cfg.weather_csv = wx_path;
        if (max_fill) cfg.gaps.max_fill = *max_fill;
        if (max_gap_fraction) cfg.gaps.max_gap_fraction = *max_gap_fraction;

        if (ingest->parsed()) return cmd_ingest(cfg, out_path);
        if (train->parsed()) return cmd_train(cfg, model, n_days);
        if (fc->parsed()) return cmd_forecast(cfg, model, n_days, out_path);
        if (evaluate->parsed()) return cmd_evaluate(cfg, out_path);
        if (report->parsed()) return cmd_report(cfg, out_path);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFit;
    }
    return kExitOk;
}
