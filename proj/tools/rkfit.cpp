// rkfit: fits Rayleigh + K mixture models to sonar-style amplitude
// populations and reports model-selection tables, PFA curves, and
// per-pixel segmentations.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rkmix/em.hpp"
#include "rkmix/errors.hpp"
#include "rkmix/mixture.hpp"
#include "rkmix/report.hpp"
#include "rkmix/selection.hpp"
#include "rkmix/tiles.hpp"

namespace fs = std::filesystem;
using namespace rkmix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct TileFlags {
    std::vector<std::size_t> origin{0, 0};
    std::vector<std::size_t> extent{0, 0};
    std::size_t factor = 6;
    std::vector<std::size_t> phase{0, 0};
    bool no_normalize = false;
};

void add_tile_flags(CLI::App* cmd, TileFlags& tf) {
    cmd->add_option("--origin", tf.origin, "Tile origin as row,col")->expected(2)
        ->delimiter(',');
    cmd->add_option("--extent", tf.extent, "Tile extent as rows,cols (0 = to edge)")
        ->expected(2)->delimiter(',');
    cmd->add_option("--decimation-factor", tf.factor, "Subsampling factor per axis")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--decimation-phase", tf.phase, "Lattice phase as row,col")
        ->expected(2)->delimiter(',');
    cmd->add_flag("--no-normalize", tf.no_normalize, "Skip RMS amplitude normalization");
}

struct EmFlags {
    double tol = EmConfig{}.tol;
    int max_iter = EmConfig{}.max_iter;
    std::string k_convention = "3M-1";
};

void add_em_flags(CLI::App* cmd, EmFlags& ef) {
    cmd->add_option("--tol", ef.tol, "Relative log-likelihood convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iter", ef.max_iter, "Iteration cap per fit")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--k-convention", ef.k_convention,
                    "Parameter-count convention, 3M-1 or 3M-2")
        ->check(CLI::IsMember({"3M-1", "3M-2"}))->capture_default_str();
}

bool is_grid_input(const fs::path& path) {
    fs::path base = path;
    if (base.extension() == ".f32" || base.extension() == ".json") base.replace_extension();
    return fs::exists(fs::path(base).concat(".json"));
}

struct Population {
    std::vector<double> a;
    PreprocessRecord record;
    std::string kind;  // "grid" | "samples"
};

// Shared front of fit/sweep/decimate: load, tile, decimate, normalize.
Population prepare_population(const fs::path& input, const TileFlags& tf) {
    Population pop;
    pop.record.decimation_factor = tf.factor;
    pop.record.decimation_phase[0] = tf.phase.at(0);
    pop.record.decimation_phase[1] = tf.phase.at(1);
    pop.record.origin[0] = tf.origin.at(0);
    pop.record.origin[1] = tf.origin.at(1);
    pop.record.extent[0] = tf.extent.at(0);
    pop.record.extent[1] = tf.extent.at(1);
    pop.record.normalized = !tf.no_normalize;

    if (is_grid_input(input)) {
        ImageGrid grid = load_grid(input);
        if (grid.quantity == Quantity::Decibel) grid = db_to_intensity(std::move(grid));
        TileSpec spec;
        spec.origin_row = tf.origin.at(0);
        spec.origin_col = tf.origin.at(1);
        spec.rows = tf.extent.at(0);
        spec.cols = tf.extent.at(1);
        spec.factor = tf.factor;
        spec.phase_row = tf.phase.at(0);
        spec.phase_col = tf.phase.at(1);
        auto extracted = extract_and_decimate(grid, spec);
        pop.a = std::move(extracted.a);
        pop.record.dropped = extracted.dropped;
        pop.kind = "grid";
    } else {
        pop.a = load_population(input);
        pop.kind = "samples";
    }
    if (pop.a.empty()) throw IoError("no positive samples in " + input.string());
    if (pop.record.normalized) pop.record.normalize_scale = normalize_rms(pop.a);
    return pop;
}

RKMixture load_model_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model spec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model spec " + path.string() + ": " + e.what());
    }
    try {
        return mixture_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model spec " + path.string() + ": " + e.what());
    }
}

struct PfaGrid {
    double start = 0.0, stop = 0.0, step = 0.0;
};

PfaGrid parse_grid(const std::string& s) {
    PfaGrid g;
    char extra;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &g.start, &g.stop, &g.step, &extra) != 3 ||
        g.step <= 0.0 || g.stop < g.start || g.start < 0.0)
        throw std::invalid_argument("grid must be start:stop:step with step > 0, got '" + s + "'");
    return g;
}

std::vector<double> grid_points(const PfaGrid& g) {
    std::vector<double> pts;
    const auto count = static_cast<std::size_t>(std::floor((g.stop - g.start) / g.step + 1e-9)) + 1;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.push_back(g.start + g.step * static_cast<double>(i));
    return pts;
}

int run_synth(const fs::path& model_path, std::size_t n, std::uint64_t seed,
              const fs::path& out, const fs::path& labels_out) {
    const RKMixture theta = load_model_spec(model_path);
    const MixtureSample sample = sample_mixture(theta, n, seed);
    save_population(sample.amplitudes, out);

    const fs::path lpath = labels_out.empty() ? fs::path(out.string() + ".labels") : labels_out;
    std::ofstream lout(lpath);
    for (const int l : sample.labels) lout << l << "\n";
    if (!lout) throw IoError("cannot write labels " + lpath.string());
    return kExitOk;
}

int run_decimate(const fs::path& input, const TileFlags& tf, const fs::path& out) {
    const Population pop = prepare_population(input, tf);
    save_population(pop.a, out);
    std::cout << pop.a.size() << " samples (" << pop.record.dropped << " dropped)\n";
    return kExitOk;
}

int run_sweep(const fs::path& input, const TileFlags& tf, const EmFlags& ef, int m_min,
              int m_max, int jobs, const fs::path& out) {
    Population pop = prepare_population(input, tf);

    EmConfig config;
    config.tol = ef.tol;
    config.max_iter = ef.max_iter;
    const KConvention convention = k_convention_from_string(ef.k_convention);

    FitReport report;
    report.input_path = input.string();
    report.input_kind = pop.kind;
    report.preprocessing = pop.record;
    report.em_config = config;
    report.selection = sweep(pop.a, m_min, m_max, config, jobs, convention);
    report.data_hash = population_hash(pop.a);
    report.generated_at = timestamp_utc();

    bool any_ok = false;
    for (const auto& row : report.selection.rows) any_ok |= !row.failed;
    if (!any_ok) throw FitError("every model order failed to fit");

    std::cout << render_table(report.selection);
    if (!out.empty()) save_report(report, out);
    return kExitOk;
}

// Loads the data named on the pfa/segment command line and reproduces the
// report's preprocessing so the provenance hash can be checked.
std::vector<double> population_for_report(const fs::path& input, const FitReport& report) {
    TileFlags tf;
    tf.origin = {report.preprocessing.origin[0], report.preprocessing.origin[1]};
    tf.extent = {report.preprocessing.extent[0], report.preprocessing.extent[1]};
    tf.factor = report.preprocessing.decimation_factor;
    tf.phase = {report.preprocessing.decimation_phase[0], report.preprocessing.decimation_phase[1]};
    tf.no_normalize = !report.preprocessing.normalized;
    Population pop = prepare_population(input, tf);
    const std::string hash = population_hash(pop.a);
    if (hash != report.data_hash)
        throw IoError("data hash " + hash + " does not match the report's " + report.data_hash +
                      "; wrong input or preprocessing");
    return std::move(pop.a);
}

int run_pfa(const fs::path& report_path, const fs::path& data_path, const std::string& grid_spec,
            const fs::path& out) {
    const FitReport report = load_report(report_path);
    bool any_converged = false;
    for (const auto& row : report.selection.rows)
        any_converged |= !row.failed && row.fit.converged;
    if (!any_converged) throw IoError("report contains no converged model");

    const auto data = population_for_report(data_path, report);
    const auto thresholds = grid_points(parse_grid(grid_spec));
    const PfaCurve curve = empirical_pfa(data, thresholds);

    std::ofstream csv(out);
    csv.precision(17);
    csv << "threshold,empirical_pfa";
    for (const auto& row : report.selection.rows)
        if (!row.failed) csv << ",model_pfa_" << row.name;
    csv << "\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        csv << thresholds[i] << "," << curve.empirical[i];
        for (const auto& row : report.selection.rows)
            if (!row.failed) csv << "," << mixture_pfa(thresholds[i], row.fit.theta);
        csv << "\n";
    }
    if (!csv) throw IoError("cannot write " + out.string());
    return kExitOk;
}

int run_segment(const fs::path& report_path, const fs::path& grid_path, int m,
                const fs::path& out) {
    const FitReport report = load_report(report_path);
    const ModelRow* row = nullptr;
    for (const auto& r : report.selection.rows)
        if (r.m == m && !r.failed) row = &r;
    if (!row) throw IoError("report has no fitted model with M = " + std::to_string(m));

    ImageGrid grid = load_grid(grid_path);
    if (grid.quantity == Quantity::Decibel) grid = db_to_intensity(std::move(grid));

    // Cut the (undecimated) tile the report describes.
    const auto& pre = report.preprocessing;
    const std::size_t rows = pre.extent[0] ? pre.extent[0] : grid.height - pre.origin[0];
    const std::size_t cols = pre.extent[1] ? pre.extent[1] : grid.width - pre.origin[1];
    if (pre.origin[0] + rows > grid.height || pre.origin[1] + cols > grid.width)
        throw ShapeMismatch("report tile extends outside this grid");

    ImageGrid tile;
    tile.width = cols;
    tile.height = rows;
    tile.pixel_size_m = grid.pixel_size_m;
    tile.quantity = grid.quantity;
    tile.values.resize(rows * cols);
    // The model lives in normalized-amplitude units; rescale the pixels to
    // match (intensity scales as the square of amplitude).
    const double s = pre.normalized ? pre.normalize_scale : 1.0;
    const double div = grid.quantity == Quantity::Intensity ? s * s : s;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            tile.values[r * cols + c] =
                static_cast<float>(grid.at(pre.origin[0] + r, pre.origin[1] + c) / div);

    const std::vector<int> labels = segment(tile, row->fit.theta);
    ImageGrid label_grid;
    label_grid.width = cols;
    label_grid.height = rows;
    label_grid.pixel_size_m = grid.pixel_size_m;
    label_grid.quantity = Quantity::Label;
    label_grid.values.assign(labels.begin(), labels.end());
    save_grid(label_grid, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rayleigh + K-distribution mixture fitting for amplitude imagery"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Draw samples from a mixture spec");
    std::string synth_model, synth_out, synth_labels;
    std::size_t synth_n = 10000;
    std::uint64_t seed = 0;
    synth->add_option("--model", synth_model, "Mixture spec JSON")->required();
    synth->add_option("--n", synth_n, "Sample count")->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--seed", seed, "RNG seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output sample file")->required();
    synth->add_option("--labels", synth_labels, "Output label file (default <out>.labels)");

    // decimate
    auto* decimate = app.add_subcommand("decimate", "Preprocess a grid into a sample vector");
    std::string dec_input, dec_out;
    TileFlags dec_tf;
    decimate->add_option("input", dec_input, "Input grid or sample file")->required();
    decimate->add_option("--out", dec_out, "Output sample file")->required();
    add_tile_flags(decimate, dec_tf);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Fit a range of model orders");
    std::string sweep_input, sweep_out;
    TileFlags sweep_tf;
    EmFlags sweep_ef;
    int m_min = 2, m_max = 5, jobs = 0;
    sweep_cmd->add_option("input", sweep_input, "Input grid or sample file")->required();
    sweep_cmd->add_option("--min-components", m_min, "Smallest M")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--max-components", m_max, "Largest M")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--jobs", jobs, "Worker threads (0 = hardware)")
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "Report JSON path");
    add_tile_flags(sweep_cmd, sweep_tf);
    add_em_flags(sweep_cmd, sweep_ef);

    // fit: single-M convenience wrapper of sweep
    auto* fit_cmd = app.add_subcommand("fit", "Fit a single model order");
    std::string fit_input, fit_out;
    TileFlags fit_tf;
    EmFlags fit_ef;
    int fit_m = 2;
    fit_cmd->add_option("input", fit_input, "Input grid or sample file")->required();
    fit_cmd->add_option("--components", fit_m, "Component count M")->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--out", fit_out, "Report JSON path");
    add_tile_flags(fit_cmd, fit_tf);
    add_em_flags(fit_cmd, fit_ef);

    // pfa
    auto* pfa_cmd = app.add_subcommand("pfa", "Export empirical and model PFA curves");
    std::string pfa_report, pfa_data, pfa_grid = "0:15:0.05", pfa_out;
    pfa_cmd->add_option("--report", pfa_report, "Fit report JSON")->required();
    pfa_cmd->add_option("--data", pfa_data, "The report's input data")->required();
    pfa_cmd->add_option("--grid", pfa_grid, "Threshold grid start:stop:step")
        ->capture_default_str();
    pfa_cmd->add_option("--out", pfa_out, "Output CSV")->required();

    // segment
    auto* seg_cmd = app.add_subcommand("segment", "Write a per-pixel component-label grid");
    std::string seg_report, seg_grid, seg_out;
    int seg_m = 0;
    seg_cmd->add_option("--report", seg_report, "Fit report JSON")->required();
    seg_cmd->add_option("--grid", seg_grid, "Input image grid")->required();
    seg_cmd->add_option("--model", seg_m, "Component count M of the model to apply")->required();
    seg_cmd->add_option("--out", seg_out, "Output label grid path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(synth))
            return run_synth(synth_model, synth_n, seed, synth_out, synth_labels);
        if (app.got_subcommand(decimate)) return run_decimate(dec_input, dec_tf, dec_out);
        if (app.got_subcommand(sweep_cmd)) {
            if (m_max < m_min) {
                std::cerr << "rkfit: --max-components must be >= --min-components\n";
                return kExitUsage;
            }
            const int n_jobs = jobs > 0 ? jobs
                                        : std::max(1u, std::thread::hardware_concurrency());
            return run_sweep(sweep_input, sweep_tf, sweep_ef, m_min, m_max, n_jobs, sweep_out);
        }
        if (app.got_subcommand(fit_cmd))
            return run_sweep(fit_input, fit_tf, fit_ef, fit_m, fit_m, 1, fit_out);
        if (app.got_subcommand(pfa_cmd)) return run_pfa(pfa_report, pfa_data, pfa_grid, pfa_out);
        if (app.got_subcommand(seg_cmd)) return run_segment(seg_report, seg_grid, seg_m, seg_out);
    } catch (const FitError& e) {
        std::cerr << "rkfit: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "rkfit: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
