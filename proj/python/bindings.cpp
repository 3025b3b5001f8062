// Python module ionlattice._core: physical configuration, closed-form
// predictions, the three experiments, fits and the config-driven runner.
// Units are SI with angular frequencies (rad/s), as in the C++ API.

#include "ionlattice/config.hpp"
#include "ionlattice/experiments.hpp"
#include "ionlattice/fitting.hpp"
#include "ionlattice/run.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

namespace py = pybind11;
using namespace ionlattice;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

ModelKind model_kind(const std::string& s) { return parse_model_kind(s); }

Integrator integrator(const std::string& s) {
    if (s == "cf4") return Integrator::MagnusCF4;
    if (s == "rk4") return Integrator::RungeKutta4;
    if (s == "adaptive") return Integrator::Adaptive;
    throw py::value_error("integrator must be cf4, rk4 or adaptive");
}

SimulationSettings settings(int fock_levels, const std::string& order, const std::string& method,
                            int steps_per_period, int window, int jobs) {
    SimulationSettings s;
    s.fock_levels = fock_levels;
    s.order = parse_expansion_order(order);
    s.method = integrator(method);
    s.steps_per_period = steps_per_period;
    s.window_half_width = window;
    s.jobs = jobs;
    return s;
}

py::dict fit_dict(const FitResult& r) {
    py::dict d, values, errors;
    for (const auto& p : r.parameters) {
        values[py::str(p.name)] = p.value;
        errors[py::str(p.name)] = p.uncertainty;
    }
    d["values"] = values;
    d["uncertainties"] = errors;
    d["converged"] = r.converged;
    d["residual_norm"] = r.residual_norm;
    d["iterations"] = r.iterations;
    d["message"] = r.message;
    return d;
}

py::dict thermometry_dict(const ThermometryResult& t) {
    py::dict d;
    d["nbar"] = t.nbar;
    d["ratio"] = t.ratio;
    d["valid"] = t.valid;
    d["flag"] = t.flag;
    return d;
}

py::dict probe_dict(const SidebandProbe& p) {
    py::dict d;
    d["offsets"] = to_array(p.offsets);
    d["red"] = to_array(p.red);
    d["blue"] = to_array(p.blue);
    d["red_center"] = p.red_center;
    d["blue_center"] = p.blue_center;
    d["duration"] = p.duration;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trapped-ion spin-motion dynamics in a running optical lattice";
    m.attr("__version__") = version_string();

    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<PhysicalConfig>(m, "PhysicalConfig", "Apparatus parameters; defaults are the paper values (rad/s, s, m, kg).")
        .def(py::init<>())
        .def_readwrite("ion_mass", &PhysicalConfig::ion_mass)
        .def_readwrite("omega_x", &PhysicalConfig::omega_x)
        .def_readwrite("omega_y", &PhysicalConfig::omega_y)
        .def_readwrite("omega_z", &PhysicalConfig::omega_z)
        .def_readwrite("lattice_wavelength", &PhysicalConfig::lattice_wavelength)
        .def_readwrite("lattice_geometry_factor", &PhysicalConfig::lattice_geometry_factor)
        .def_readwrite("stark_amplitude", &PhysicalConfig::stark_amplitude)
        .def_readwrite("running_freq", &PhysicalConfig::running_freq)
        .def_readwrite("microwave_rabi", &PhysicalConfig::microwave_rabi)
        .def_readwrite("microwave_detuning", &PhysicalConfig::microwave_detuning)
        .def_readwrite("coherence_time", &PhysicalConfig::coherence_time)
        .def("__repr__", [](const PhysicalConfig& c) {
            return "PhysicalConfig(omega_z=2pi*" + format_double(units::to_khz(c.omega_z)) + " kHz, omega_r=2pi*" +
                   format_double(units::to_khz(c.running_freq)) + " kHz, stark=2pi*" +
                   format_double(units::to_khz(c.stark_amplitude)) + " kHz)";
        });

    // closed forms
    m.def("lamb_dicke", &lamb_dicke, py::arg("cfg"));
    m.def(
        "effective_lamb_dicke",
        [](const PhysicalConfig& c, const std::string& sign) {
            if (sign != "minus" && sign != "plus") throw py::value_error("sign must be 'minus' or 'plus'");
            return effective_lamb_dicke(c, sign == "minus" ? LatticeSign::Minus : LatticeSign::Plus);
        },
        py::arg("cfg"), py::arg("sign") = "minus");
    m.def(
        "predicted_rabi", [](const PhysicalConfig& c, const std::string& b) { return predicted_rabi(c, parse_sideband_branch(b)); },
        py::arg("cfg"), py::arg("branch"));
    m.def(
        "predicted_rabi_curve",
        [](const PhysicalConfig& c, const Array& freqs, const std::string& b) {
            const auto grid = to_vector(freqs);
            std::vector<double> out;
            for (const auto& p : predicted_rabi_curve(c, grid, parse_sideband_branch(b)))
                out.push_back(p.rabi.value_or(std::numeric_limits<double>::quiet_NaN()));
            return to_array(out);
        },
        py::arg("cfg"), py::arg("running_freqs"), py::arg("branch"), "NaN marks singular points.");
    m.def(
        "branch_detuning", [](const PhysicalConfig& c, const std::string& b) { return branch_detuning(c, parse_sideband_branch(b)); },
        py::arg("cfg"), py::arg("branch"));
    m.def("carrier_light_shift", &carrier_light_shift, py::arg("cfg"), py::arg("detuning"));
    m.def(
        "resonant_detuning",
        [](const PhysicalConfig& c, const std::string& b) { return resonant_detuning(c, parse_sideband_branch(b)); },
        py::arg("cfg"), py::arg("branch"));
    m.def(
        "thermal_distribution",
        [](double nbar, int levels) { return to_array(thermal_distribution(nbar, levels).probabilities); },
        py::arg("nbar"), py::arg("fock_levels"));

    // experiments
    m.def(
        "sideband_spectrum",
        [](const PhysicalConfig& c, const Array& grid, double pulse, double nbar0, int fock_levels,
           const std::string& order, const std::string& method, int steps_per_period, int window, int jobs,
           double prominence, bool dephasing) {
            SpectrumOptions opt;
            opt.sim = settings(fock_levels, order, method, steps_per_period, window, jobs);
            opt.prominence = prominence;
            opt.apply_dephasing = dephasing;
            const auto g = to_vector(grid);
            SpectrumResult r;
            {
                py::gil_scoped_release release;
                r = sideband_spectrum(c, g, pulse, nbar0, opt);
            }
            py::dict d;
            d["detunings"] = to_array(r.detunings);
            d["populations"] = to_array(r.populations);
            std::vector<double> peaks;
            for (const auto& p : r.peaks) peaks.push_back(p.detuning);
            d["peaks"] = to_array(peaks);
            d["errors"] = r.errors;
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("cfg"), py::arg("grid"), py::arg("pulse_duration"), py::arg("nbar0"), py::arg("fock_levels") = 160,
        py::arg("order") = "first", py::arg("integrator") = "cf4", py::arg("steps_per_period") = 20,
        py::arg("window") = 6, py::arg("jobs") = 1, py::arg("prominence") = kDefaultPeakProminence,
        py::arg("dephasing") = false);

    m.def(
        "rabi_trace",
        [](const PhysicalConfig& c, const Array& durations, double nbar0, double detuning, const std::string& model,
           const std::string& branch, int fock_levels, const std::string& order, const std::string& method,
           int steps_per_period, int window, int jobs) {
            const auto t = to_vector(durations);
            PulseSpec pulse{detuning, t.empty() ? 0.0 : t.back(), model_kind(model), parse_sideband_branch(branch)};
            const auto sim = settings(fock_levels, order, method, steps_per_period, window, jobs);
            TrajectoryResult r;
            {
                py::gil_scoped_release release;
                r = rabi_trace(c, pulse, t, nbar0, sim);
            }
            return to_array(r.populations);
        },
        py::arg("cfg"), py::arg("durations"), py::arg("nbar0"), py::arg("detuning") = 0.0, py::arg("model") = "full",
        py::arg("branch") = "blue_minus", py::arg("fock_levels") = 160, py::arg("order") = "first",
        py::arg("integrator") = "cf4", py::arg("steps_per_period") = 20, py::arg("window") = 6, py::arg("jobs") = 1);

    m.def(
        "sideband_cooling",
        [](const PhysicalConfig& c, double nbar0, int pulses, double first, double last, std::optional<double> detuning,
           const std::string& model, int fock_levels, int jobs) {
            auto sched = CoolingSchedule::for_config(c);
            sched.pulse_count = pulses;
            sched.first_duration = first;
            sched.last_duration = last;
            if (detuning) sched.detuning = *detuning;
            CoolingOptions opt;
            opt.model = model_kind(model);
            opt.fock_levels = fock_levels;
            opt.sim.jobs = jobs;
            CoolingResult r;
            {
                py::gil_scoped_release release;
                r = sideband_cooling(c, sched, nbar0, opt);
            }
            py::dict d;
            d["nbar"] = to_array(r.nbar);
            d["final_nbar"] = r.final_nbar();
            d["phonon_populations"] = to_array(r.phonon_populations);
            d["fock_levels"] = r.fock_levels;
            d["before"] = probe_dict(r.before);
            d["after"] = probe_dict(r.after);
            d["thermometry"] = thermometry_dict(r.thermometry);
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("cfg"), py::arg("nbar0") = 18.0, py::arg("pulses") = 200, py::arg("first_duration") = 60e-6,
        py::arg("last_duration") = 230e-6, py::arg("detuning") = std::nullopt, py::arg("model") = "effective",
        py::arg("fock_levels") = 0, py::arg("jobs") = 1);

    m.def(
        "sideband_asymmetry_thermometry",
        [](double red, double blue) { return thermometry_dict(sideband_asymmetry_thermometry(red, blue)); },
        py::arg("p_red"), py::arg("p_blue"));
    m.def(
        "effective_sideband_probe",
        [](const PhysicalConfig& c, const Array& probs, bool red, double duration, double offset) {
            const auto p = to_vector(probs);
            return effective_sideband_probe(c, p, red, duration, offset);
        },
        py::arg("cfg"), py::arg("phonon_probs"), py::arg("red"), py::arg("duration"), py::arg("offset") = 0.0);

    // fits
    m.def(
        "thermal_rabi_model",
        [](const Array& t, double rabi, double nbar, bool red) {
            std::vector<double> out;
            for (double x : to_vector(t)) out.push_back(thermal_rabi_model(x, rabi, nbar, red ? SidebandKind::Red : SidebandKind::Blue));
            return to_array(out);
        },
        py::arg("times"), py::arg("rabi"), py::arg("nbar"), py::arg("red") = false);
    m.def(
        "fit_thermal_rabi",
        [](const Array& t, const Array& p, std::optional<std::pair<double, double>> guess, bool red,
           double coherence_time) {
            std::optional<ThermalRabiGuess> g;
            if (guess) g = ThermalRabiGuess{guess->first, guess->second};
            return fit_dict(fit_thermal_rabi(to_vector(t), to_vector(p), g, red ? SidebandKind::Red : SidebandKind::Blue,
                                             coherence_time));
        },
        py::arg("times"), py::arg("populations"), py::arg("guess") = std::nullopt, py::arg("red") = false,
        py::arg("coherence_time") = 0.0);
    m.def(
        "fit_damped_sinusoid", [](const Array& t, const Array& p) { return fit_dict(fit_damped_sinusoid(to_vector(t), to_vector(p))); },
        py::arg("times"), py::arg("populations"));

    // config-driven runs
    m.def(
        "echo_config", [](const std::string& text) { return echo_config(parse_config(text)); }, py::arg("text"),
        "Parse a configuration and return the fully resolved echo.");
    m.def(
        "run",
        [](const std::string& text, std::optional<std::string> experiment, int jobs, std::optional<std::string> out_dir) {
            std::optional<Experiment> e;
            if (experiment) e = parse_experiment(*experiment);
            const auto cfg = parse_config(text, e);
            ResultBundle b;
            {
                py::gil_scoped_release release;
                b = run(cfg, jobs);
            }
            if (out_dir) {
                write_bundle(b, *out_dir);
                emit_plot_data(b, *out_dir);
            }
            py::dict d;
            d["experiment"] = to_string(b.experiment);
            d["columns"] = b.table.columns;
            d["rows"] = b.table.rows;
            d["csv"] = b.table.to_csv();
            d["config_echo"] = b.config_echo;
            d["details"] = b.details_json;
            d["warnings"] = b.warnings;
            d["wall_seconds"] = b.wall_seconds;
            return d;
        },
        py::arg("config_text"), py::arg("experiment") = std::nullopt, py::arg("jobs") = 1, py::arg("out_dir") = std::nullopt,
        "Run a configuration given as text; optionally write CSV, sidecar and plot files to out_dir.");
}
