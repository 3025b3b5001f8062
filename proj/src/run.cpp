#include "ionlattice/run.hpp"

#include "ionlattice/errors.hpp"
#include "ionlattice/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ionlattice {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) { return format_double(v); }

// json cannot hold NaN/inf; keep them readable.
json jnum(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

std::vector<double> apply_noise(const RunConfig& cfg, std::span<const double> values, std::uint64_t stream) {
    const auto& s = cfg.simulation;
    // distinct, reproducible streams per use
    const std::uint64_t seed = s.seed * 0x9E3779B97F4A7C15ULL + stream;
    switch (s.noise) {
        case NoiseModel::Gaussian: return add_gaussian_noise(values, s.noise_sigma, seed);
        case NoiseModel::Binomial: return add_binomial_noise(values, s.shots, seed);
        case NoiseModel::None: break;
    }
    return {values.begin(), values.end()};
}

void run_spectrum(const RunConfig& cfg, int jobs, ResultBundle& b) {
    const auto phys = cfg.physics.physical();
    const auto grid_hz = linear_grid(cfg.spectrum.start_hz, cfg.spectrum.stop_hz,
                                     static_cast<std::size_t>(cfg.spectrum.points));
    std::vector<double> grid(grid_hz.size());
    std::transform(grid_hz.begin(), grid_hz.end(), grid.begin(), [](double hz) { return units::angular(hz); });

    SpectrumOptions opt;
    opt.sim = cfg.simulation.settings(jobs);
    opt.prominence = cfg.spectrum.prominence;
    opt.apply_dephasing = cfg.spectrum.dephasing;
    auto res = sideband_spectrum(phys, grid, cfg.spectrum.pulse_s, cfg.simulation.nbar0, opt);
    const bool noisy = cfg.simulation.noise != NoiseModel::None;
    const auto measured = apply_noise(cfg, res.populations, 1);
    if (noisy) res.peaks = find_peaks(res.detunings, measured, opt.prominence);

    b.table.columns = {"detuning_khz", "p1"};
    if (noisy) b.table.columns.push_back("p1_exact");
    PlotCurve curve{"spectrum", {"detuning_khz", "p1"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double khz = grid_hz[i] / 1e3;
        std::vector<std::string> row{num(khz), num(measured[i])};
        if (noisy) row.push_back(num(res.populations[i]));
        b.table.rows.push_back(std::move(row));
        curve.rows.push_back({khz, measured[i]});
    }
    b.curves.push_back(std::move(curve));

    json d;
    d["pulse_duration_s"] = res.pulse_duration;
    d["nbar0"] = res.nbar0;
    d["prominence"] = opt.prominence;
    json peaks = json::array();
    for (const auto& p : res.peaks) {
        peaks.push_back({{"detuning_khz", units::to_khz(p.detuning)}, {"height", p.height}, {"prominence", p.prominence}});
    }
    d["peaks"] = peaks;
    json errors = json::array();
    for (std::size_t i = 0; i < res.errors.size(); ++i) {
        if (!res.errors[i].empty()) errors.push_back({{"detuning_khz", grid_hz[i] / 1e3}, {"error", res.errors[i]}});
    }
    d["failed_points"] = errors;
    b.details_json = d.dump();
    b.warnings = res.warnings;
}

FitResult fit_trace(SidebandBranch branch, std::span<const double> t, std::span<const double> p, double t2) {
    if (branch == SidebandBranch::CarrierC1) return fit_damped_sinusoid(t, p);
    return fit_thermal_rabi(t, p, std::nullopt, is_red(branch) ? SidebandKind::Red : SidebandKind::Blue, t2);
}

json fit_json(const FitResult& fit) {
    json j;
    json params = json::object();
    for (const auto& p : fit.parameters) params[p.name] = {{"value", jnum(p.value)}, {"uncertainty", jnum(p.uncertainty)}};
    j["parameters"] = params;
    j["residual_norm"] = jnum(fit.residual_norm);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["message"] = fit.message;
    return j;
}

void run_rabi(const RunConfig& cfg, int jobs, ResultBundle& b) {
    const auto phys = cfg.physics.physical();
    double detuning = units::angular(cfg.rabi.detuning_hz);
    if (cfg.rabi.light_shift && cfg.rabi.model == ModelKind::Full) detuning -= carrier_light_shift(phys, detuning);
    PulseSpec pulse{detuning, cfg.rabi.duration_s, cfg.rabi.model, cfg.rabi.branch};
    pulse.validate();
    const auto times = uniform_samples(cfg.rabi.duration_s, cfg.rabi.samples);
    const auto traj = rabi_trace(phys, pulse, times, cfg.simulation.nbar0, cfg.simulation.settings(jobs));
    const auto measured = apply_noise(cfg, traj.populations, 2);
    const bool noisy = cfg.simulation.noise != NoiseModel::None;

    b.table.columns = {"time_us", "p1"};
    if (noisy) b.table.columns.push_back("p1_exact");
    PlotCurve curve{"rabi", {"time_us", "p1"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double us = units::to_microseconds(times[i]);
        std::vector<std::string> row{num(us), num(measured[i])};
        if (noisy) row.push_back(num(traj.populations[i]));
        b.table.rows.push_back(std::move(row));
        curve.rows.push_back({us, measured[i]});
    }
    b.curves.push_back(std::move(curve));

    json d;
    d["model"] = to_string(cfg.rabi.model);
    d["drive_detuning_hz"] = detuning / units::kTwoPi;
    d["branch"] = to_string(cfg.rabi.branch);
    d["steps"] = traj.steps;
    d["max_norm_error"] = traj.max_norm_error;
    d["fit"] = fit_json(fit_trace(cfg.rabi.branch, times, measured, phys.coherence_time));
    try {
        d["predicted_rabi_khz"] = units::to_khz(predicted_rabi(phys, cfg.rabi.branch));
    } catch (const ResonanceError& e) {
        d["predicted_rabi_khz"] = nullptr;
        d["prediction_error"] = e.what();
    }
    b.details_json = d.dump();
    b.warnings = traj.warnings;
}

void run_rabi_scan(const RunConfig& cfg, int jobs, ResultBundle& b) {
    const auto phys = cfg.physics.physical();
    std::vector<double> wr(cfg.rabi_scan.running_hz.size());
    std::transform(cfg.rabi_scan.running_hz.begin(), cfg.rabi_scan.running_hz.end(), wr.begin(),
                   [](double hz) { return units::angular(hz); });
    RabiScanOptions opt;
    opt.sim = cfg.simulation.settings(jobs);
    opt.nbar0 = cfg.simulation.nbar0;
    opt.samples = cfg.rabi_scan.samples;
    opt.periods = cfg.rabi_scan.periods;
    opt.c1_periods = cfg.rabi_scan.c1_periods;
    auto points = rabi_vs_lattice_frequency(phys, wr, cfg.rabi_scan.branches, opt);

    // Noisy variant: refit the noisy traces.
    if (cfg.simulation.noise != NoiseModel::None) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto& p = points[i];
            if (p.trace_populations.empty()) continue;
            p.trace_populations = apply_noise(cfg, p.trace_populations, 100 + i);
            const auto fit = fit_trace(p.branch, p.trace_times, p.trace_populations, phys.coherence_time);
            const char* key = p.branch == SidebandBranch::CarrierC1 ? "omega" : "rabi";
            if (p.branch != SidebandBranch::CarrierC1) p.fitted_nbar = fit.value("nbar");
            p.measured = fit.value(key);
            p.measured_uncertainty = fit.uncertainty(key);
            p.fit_converged = fit.converged;
            if (!std::isfinite(*p.measured)) p.measured.reset();
        }
    }

    b.table.columns = {"omega_r_khz", "branch", "measured_khz", "measured_err_khz", "predicted_khz",
                       "fit_converged", "fitted_nbar", "error"};
    const double nan = std::nan("");
    for (const auto& p : points) {
        b.table.rows.push_back({num(units::to_khz(p.running_freq)), to_string(p.branch),
                                num(p.measured ? units::to_khz(*p.measured) : nan),
                                num(units::to_khz(p.measured_uncertainty)),
                                num(p.predicted ? units::to_khz(*p.predicted) : nan), p.fit_converged ? "1" : "0",
                                num(p.fitted_nbar), p.error});
    }

    const auto [lo_it, hi_it] = std::minmax_element(wr.begin(), wr.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    for (auto branch : cfg.rabi_scan.branches) {
        PlotCurve measured{"measured_" + to_string(branch), {"omega_r_khz", "rabi_khz", "rabi_err_khz"}, {}};
        for (const auto& p : points) {
            if (p.branch == branch && p.measured) {
                measured.rows.push_back({units::to_khz(p.running_freq), units::to_khz(*p.measured),
                                         units::to_khz(p.measured_uncertainty)});
            }
        }
        PlotCurve predicted{"predicted_" + to_string(branch), {"omega_r_khz", "rabi_khz"}, {}};
        const auto dense = hi > lo ? linear_grid(lo, hi, 400) : std::vector<double>{lo};
        for (const auto& pr : predicted_rabi_curve(phys, dense, branch)) {
            if (pr.rabi) predicted.rows.push_back({units::to_khz(pr.running_freq), units::to_khz(*pr.rabi)});
        }
        b.curves.push_back(std::move(measured));
        b.curves.push_back(std::move(predicted));
    }
    json d;
    d["nbar0"] = opt.nbar0;
    d["points"] = points.size();
    b.details_json = d.dump();
}

void run_cool(const RunConfig& cfg, int jobs, ResultBundle& b) {
    const auto phys = cfg.physics.physical();
    CoolingOptions opt;
    opt.model = cfg.cool.model;
    opt.sim = cfg.simulation.settings(jobs);
    opt.probe_before = cfg.cool.probe_before_s;
    opt.probe_after = cfg.cool.probe_after_s;
    opt.probe_span = units::angular(cfg.cool.probe_span_hz);
    opt.probe_points = cfg.cool.probe_points;
    opt.track_light_shift = cfg.cool.light_shift;
    const auto res = sideband_cooling(phys, cfg.cool.schedule(), cfg.simulation.nbar0, opt);

    b.table.columns = {"pulse_index", "nbar"};
    PlotCurve nbar{"cooling_nbar", {"pulse_index", "nbar"}, {}};
    for (std::size_t k = 0; k < res.nbar.size(); ++k) {
        b.table.rows.push_back({std::to_string(k + 1), num(res.nbar[k])});
        nbar.rows.push_back({static_cast<double>(k + 1), res.nbar[k]});
    }
    b.curves.push_back(std::move(nbar));

    auto probe_curves = [&](const SidebandProbe& probe, const std::string& when, std::uint64_t stream) {
        const auto red = apply_noise(cfg, probe.red, stream);
        const auto blue = apply_noise(cfg, probe.blue, stream + 1);
        PlotCurve r{"sideband_" + when + "_red", {"detuning_khz", "p1"}, {}};
        PlotCurve bl{"sideband_" + when + "_blue", {"detuning_khz", "p1"}, {}};
        for (std::size_t i = 0; i < probe.offsets.size(); ++i) {
            r.rows.push_back({units::to_khz(probe.red_center + probe.offsets[i]), red[i]});
            bl.rows.push_back({units::to_khz(probe.blue_center + probe.offsets[i]), blue[i]});
        }
        b.curves.push_back(std::move(r));
        b.curves.push_back(std::move(bl));
    };
    probe_curves(res.before, "before", 10);
    probe_curves(res.after, "after", 20);

    json d;
    d["initial_nbar"] = res.initial_nbar;
    d["final_nbar"] = res.final_nbar();
    d["fock_levels"] = res.fock_levels;
    d["model"] = to_string(cfg.cool.model);
    d["total_time_s"] = cfg.cool.schedule().total_time();
    d["thermometry"] = {{"nbar", jnum(res.thermometry.nbar)},
                        {"ratio", jnum(res.thermometry.ratio)},
                        {"valid", res.thermometry.valid},
                        {"flag", res.thermometry.flag}};
    b.details_json = d.dump();
    b.warnings = res.warnings;
}

void run_thermo(const RunConfig& cfg, ResultBundle& b) {
    const auto phys = cfg.physics.physical();
    json rows = json::array();
    auto flag_text = [](const ThermometryResult& t) { return t.flag.empty() ? std::string("ok") : t.flag; };
    if (cfg.thermo.mode == ThermoSection::Mode::Direct) {
        b.table.columns = {"p_red", "p_blue", "ratio", "nbar_estimate", "flag"};
        for (std::size_t i = 0; i < cfg.thermo.p_red.size(); ++i) {
            const auto t = sideband_asymmetry_thermometry(cfg.thermo.p_red[i], cfg.thermo.p_blue[i]);
            b.table.rows.push_back({num(cfg.thermo.p_red[i]), num(cfg.thermo.p_blue[i]), num(t.ratio), num(t.nbar),
                                    flag_text(t)});
        }
    } else {
        b.table.columns = {"nbar_true", "p_red", "p_blue", "ratio", "nbar_estimate", "flag"};
        PlotCurve curve{"thermometry", {"nbar_true", "nbar_estimate"}, {}};
        for (std::size_t i = 0; i < cfg.thermo.nbar.size(); ++i) {
            const double nbar = cfg.thermo.nbar[i];
            // truncation with thermal tail below 1e-12
            int levels = cfg.simulation.fock_levels;
            if (nbar > 0.0) {
                const double r = nbar / (nbar + 1.0);
                levels = std::max(levels, static_cast<int>(std::ceil(std::log(1e-12) / std::log(r))));
            }
            const auto p = thermal_distribution(nbar, levels).probabilities;
            double red = effective_sideband_probe(phys, p, true, cfg.thermo.pulse_s);
            double blue = effective_sideband_probe(phys, p, false, cfg.thermo.pulse_s);
            if (cfg.simulation.noise != NoiseModel::None) {
                const std::vector<double> pair{red, blue};
                const auto noisy = apply_noise(cfg, pair, 200 + i);
                red = noisy[0];
                blue = noisy[1];
            }
            const auto t = sideband_asymmetry_thermometry(red, blue);
            b.table.rows.push_back({num(nbar), num(red), num(blue), num(t.ratio), num(t.nbar), flag_text(t)});
            curve.rows.push_back({nbar, t.nbar});
        }
        b.curves.push_back(std::move(curve));
    }
    json d;
    d["mode"] = cfg.thermo.mode == ThermoSection::Mode::Direct ? "direct" : "simulate";
    d["pulse_s"] = cfg.thermo.pulse_s;
    b.details_json = d.dump();
}

}  // namespace

ResultBundle run(const RunConfig& config, int jobs) {
    const auto start = std::chrono::steady_clock::now();
    ResultBundle b;
    b.experiment = config.experiment;
    b.config = config;
    b.config_echo = echo_config(config);
    b.version = version_string();
    for (const auto& issue : validate_config(config.physics.physical())) {
        if (issue.severity == ConfigIssue::Severity::Warning) b.warnings.push_back(issue.code + ": " + issue.message);
    }
    std::vector<std::string> pre = std::move(b.warnings);
    b.warnings.clear();
    switch (config.experiment) {
        case Experiment::Spectrum: run_spectrum(config, jobs, b); break;
        case Experiment::Rabi: run_rabi(config, jobs, b); break;
        case Experiment::RabiScan: run_rabi_scan(config, jobs, b); break;
        case Experiment::Cool: run_cool(config, jobs, b); break;
        case Experiment::Thermometry: run_thermo(config, b); break;
    }
    b.warnings.insert(b.warnings.begin(), pre.begin(), pre.end());
    b.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return b;
}

}  // namespace ionlattice
