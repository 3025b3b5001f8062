#include "ionlattice/run.hpp"

#include "ionlattice/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <system_error>

namespace ionlattice {

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << content;
    f.close();
    if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string file_stem(Experiment e) {
    auto s = to_string(e);
    for (auto& c : s) {
        if (c == '-') c = '_';
    }
    return s;
}

}  // namespace

std::string version_string() { return IONLATTICE_VERSION; }

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_cell(columns[i]);
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size()) throw DimensionError("table row width differs from the header");
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
        out += '\n';
    }
    return out;
}

WrittenFiles write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir) {
    ensure_dir(dir);
    WrittenFiles files{dir / (file_stem(bundle.experiment) + ".csv"), dir / (file_stem(bundle.experiment) + ".json")};
    write_file(files.csv, bundle.table.to_csv());

    nlohmann::ordered_json meta;
    meta["version"] = bundle.version;
    meta["experiment"] = to_string(bundle.experiment);
    meta["seed"] = bundle.config.simulation.seed;
    meta["wall_time_s"] = bundle.wall_seconds;
    meta["csv"] = files.csv.filename().string();
    meta["columns"] = bundle.table.columns;
    meta["rows"] = bundle.table.rows.size();
    meta["warnings"] = bundle.warnings;
    meta["details"] = bundle.details_json.empty() ? nlohmann::ordered_json::object()
                                                  : nlohmann::ordered_json::parse(bundle.details_json);
    meta["config"] = bundle.config_echo;
    write_file(files.metadata, meta.dump(2) + "\n");
    return files;
}

std::vector<std::filesystem::path> emit_plot_data(const ResultBundle& bundle, const std::filesystem::path& dir) {
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& curve : bundle.curves) {
        std::string text = "#";
        for (const auto& c : curve.columns) text += " " + c;
        text += '\n';
        for (const auto& row : curve.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) text += (i ? " " : "") + format_double(row[i]);
            text += '\n';
        }
        auto path = dir / (curve.name + ".dat");
        write_file(path, text);
        written.push_back(std::move(path));
    }
    return written;
}

}  // namespace ionlattice
