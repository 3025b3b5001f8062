#pragma once

// Experiment dispatch for a RunConfig and the files it produces: one CSV
// table, a JSON metadata sidecar and gnuplot-ready curve files.

#include "ionlattice/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ionlattice {

// Comma-separated table; cells are preformatted text.
struct Table {
    std::vector<std::string> columns;  // names carry units, e.g. detuning_khz
    std::vector<std::vector<std::string>> rows;

    // Header + rows, LF line endings, RFC 4180 quoting where needed.
    std::string to_csv() const;
};

// One whitespace-delimited plot file.
struct PlotCurve {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ResultBundle {
    Experiment experiment = Experiment::Spectrum;
    RunConfig config;
    std::string config_echo;
    std::string version;
    double wall_seconds = 0.0;
    Table table;
    std::vector<PlotCurve> curves;
    std::string details_json;  // experiment-specific summary (peaks, fits, ...)
    std::vector<std::string> warnings;
};

std::string version_string();

// Runs the selected experiment. jobs sizes the worker pool; results do not
// depend on it.
ResultBundle run(const RunConfig& config, int jobs = 1);

struct WrittenFiles {
    std::filesystem::path csv;
    std::filesystem::path metadata;
};

// <dir>/<experiment>.csv and <dir>/<experiment>.json; creates dir.
WrittenFiles write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir);

// One <dir>/<curve>.dat per curve.
std::vector<std::filesystem::path> emit_plot_data(const ResultBundle& bundle, const std::filesystem::path& dir);

}  // namespace ionlattice
