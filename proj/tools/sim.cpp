// sim <command> --config <path> [--jobs N] [--seed S] [--out DIR]

#include "ionlattice/config.hpp"
#include "ionlattice/parallel.hpp"
#include "ionlattice/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace ionlattice;

int main(int argc, char** argv) {
    CLI::App app{"Trapped-ion running-lattice simulator"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path;
    int jobs = default_jobs();
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool no_plots = false;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"spectrum", "P1 versus microwave detuning after a fixed pulse"},
        {"rabi", "thermal Rabi trace at one detuning"},
        {"rabi-scan", "fitted sideband / C1 Rabi frequencies versus lattice frequency"},
        {"cool", "sideband cooling sequence with before/after sideband probes"},
        {"thermo", "sideband-asymmetry thermometry"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config,-c", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed,-s", seed, "noise seed (overrides simulation.seed)");
        sub->add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
        sub->add_flag("--no-plots", no_plots, "skip gnuplot data files");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        auto cfg = load_config(config_path, parse_experiment(command));
        if (seed) cfg.simulation.seed = *seed;
        if (out_dir) cfg.output.dir = *out_dir;

        const auto bundle = run(cfg, jobs);
        const auto files = write_bundle(bundle, cfg.output.dir);
        std::cout << "wrote " << files.csv.string() << " (" << bundle.table.rows.size() << " rows)\n";
        std::cout << "wrote " << files.metadata.string() << "\n";
        if (!no_plots) {
            for (const auto& p : emit_plot_data(bundle, cfg.output.dir)) std::cout << "wrote " << p.string() << "\n";
        }
        for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "done in " << bundle.wall_seconds << " s\n";
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
