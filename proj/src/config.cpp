#include "ionlattice/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ionlattice {

ConfigParseError::ConfigParseError(std::string key, int line, const std::string& what)
    : ConfigurationError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + what),
      key_(std::move(key)),
      line_(line) {}

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Spectrum: return "spectrum";
        case Experiment::Rabi: return "rabi";
        case Experiment::RabiScan: return "rabi-scan";
        case Experiment::Cool: return "cool";
        case Experiment::Thermometry: return "thermo";
    }
    return "spectrum";
}

Experiment parse_experiment(const std::string& text) {
    if (text == "spectrum") return Experiment::Spectrum;
    if (text == "rabi") return Experiment::Rabi;
    if (text == "rabi-scan" || text == "rabi_scan") return Experiment::RabiScan;
    if (text == "cool") return Experiment::Cool;
    if (text == "thermo" || text == "thermometry") return Experiment::Thermometry;
    throw ConfigurationError("unknown experiment '" + text + "' (expected spectrum, rabi, rabi-scan, cool or thermo)");
}

std::string to_string(NoiseModel n) {
    switch (n) {
        case NoiseModel::None: return "none";
        case NoiseModel::Gaussian: return "gaussian";
        case NoiseModel::Binomial: return "binomial";
    }
    return "none";
}

PhysicalConfig PhysicsSection::physical() const {
    PhysicalConfig c;
    c.ion_mass = mass_u * units::kAtomicMassUnit;
    c.omega_x = units::angular(omega_x_hz);
    c.omega_y = units::angular(omega_y_hz);
    c.omega_z = units::angular(omega_z_hz);
    c.lattice_wavelength = wavelength_m;
    c.lattice_geometry_factor = geometry_factor;
    c.stark_amplitude = units::angular(stark_hz);
    c.running_freq = units::angular(running_hz);
    c.microwave_rabi = units::angular(rabi_hz);
    c.microwave_detuning = units::angular(detuning_hz);
    c.coherence_time = t2_s;
    return c;
}

SimulationSettings SimulationSection::settings(int jobs) const {
    SimulationSettings s;
    s.fock_levels = fock_levels;
    s.order = order;
    s.method = integrator;
    s.steps_per_period = steps_per_period;
    s.window_half_width = window;
    s.jobs = jobs;
    return s;
}

CoolingSchedule CoolSection::schedule() const {
    CoolingSchedule s;
    s.pulse_count = pulses;
    s.first_duration = first_s;
    s.last_duration = last_s;
    s.repump_duration = repump_s;
    s.detuning = units::angular(detuning_hz);
    return s;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[128];
    // shortest round-trip digits; positional notation in the everyday range
    const double a = std::abs(v);
    const auto fmt = (a >= 1e-4 && a < 1e15) ? std::chars_format::fixed : std::chars_format::scientific;
    auto res = std::to_chars(buf, buf + sizeof(buf), v, fmt);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

// Context for one key = value line.
struct Entry {
    std::string key;
    std::string value;
    int line;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigParseError(key, line, what); }
};

double parse_number(const Entry& e, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) e.fail("'" + text + "' is not a number");
    if (!std::isfinite(v)) e.fail("value must be finite");
    return v;
}

// "<number> <unit>". Decimal unit prefixes shift the exponent of the literal
// before conversion, so "377.2 nm" reads as the double nearest 3.772e-7.
struct Unit {
    const char* name;
    int exp10;
    double divisor = 1.0;  // non-decimal units (kg -> u)
};

double parse_scaled(const Entry& e, const std::string& number, int exp10) {
    if (exp10 == 0) return parse_number(e, number);
    std::string mantissa = number;
    long long exponent = exp10;
    if (const auto pos = number.find_first_of("eE"); pos != std::string::npos) {
        mantissa = number.substr(0, pos);
        long long given = 0;
        const auto tail = number.substr(pos + 1);
        auto res = std::from_chars(tail.data(), tail.data() + tail.size(), given);
        if (res.ec != std::errc() || res.ptr != tail.data() + tail.size()) e.fail("'" + number + "' is not a number");
        exponent += given;
    }
    return parse_number(e, mantissa + "e" + std::to_string(exponent));
}

double parse_quantity(const Entry& e, const std::string& text, std::initializer_list<Unit> units,
                      const char* kind) {
    std::string number = text;
    std::string unit;
    const auto space = text.find_first_of(" \t");
    if (space != std::string::npos) {
        number = trim(text.substr(0, space));
        unit = trim(text.substr(space));
    } else {
        // allow "300kHz"
        auto pos = text.find_first_not_of("0123456789+-.eE");
        while (pos != std::string::npos && pos > 0 && (text[pos - 1] == 'e' || text[pos - 1] == 'E')) {
            pos = text.find_first_not_of("0123456789+-.eE", pos + 1);
        }
        if (pos != std::string::npos) {
            number = text.substr(0, pos);
            unit = text.substr(pos);
        }
    }
    std::string names;
    for (const auto& u : units) names += std::string(names.empty() ? "" : ", ") + u.name;
    if (unit.empty()) e.fail(std::string("missing unit suffix on ") + kind + " value '" + text + "' (use " + names + ")");
    for (const auto& u : units) {
        if (unit == u.name) {
            const double v = parse_scaled(e, number, u.exp10);
            return u.divisor == 1.0 ? v : v / u.divisor;
        }
    }
    e.fail("unknown " + std::string(kind) + " unit '" + unit + "' (use " + names + ")");
}

double parse_frequency(const Entry& e, const std::string& text) {
    return parse_quantity(e, text, {{"Hz", 0}, {"kHz", 3}, {"MHz", 6}, {"GHz", 9}}, "frequency");
}

double parse_time(const Entry& e, const std::string& text) {
    return parse_quantity(e, text, {{"s", 0}, {"ms", -3}, {"us", -6}, {"ns", -9}}, "time");
}

double parse_length(const Entry& e, const std::string& text) {
    return parse_quantity(e, text, {{"m", 0}, {"um", -6}, {"nm", -9}}, "length");
}

double parse_mass_u(const Entry& e, const std::string& text) {
    return parse_quantity(e, text, {{"u", 0}, {"kg", 0, units::kAtomicMassUnit}}, "mass");
}

double parse_real(const Entry& e, const std::string& text) { return parse_number(e, trim(text)); }

long long parse_integer(const Entry& e, const std::string& text) {
    long long v = 0;
    const auto t = trim(text);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) e.fail("'" + t + "' is not an integer");
    return v;
}

bool parse_bool(const Entry& e, const std::string& text) {
    if (text == "true" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "no" || text == "off") return false;
    e.fail("'" + text + "' is not a boolean (true/false)");
}

int int_at_least(const Entry& e, long long min) {
    const long long v = parse_integer(e, e.value);
    if (v < min || v > 1000000000LL) e.fail("must be an integer >= " + std::to_string(min));
    return static_cast<int>(v);
}

double positive(const Entry& e, double v) {
    if (!(v > 0.0)) e.fail("must be > 0");
    return v;
}

double non_negative(const Entry& e, double v) {
    if (!(v >= 0.0)) e.fail("must be >= 0");
    return v;
}

double probability(const Entry& e, double v) {
    if (v < 0.0 || v > 1.0) e.fail("probability must lie in [0, 1]");
    return v;
}

template <typename Fn>
auto wrap(const Entry& e, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigParseError&) {
        throw;
    } catch (const std::exception& ex) {
        e.fail(ex.what());
    }
}

std::string integrator_name(Integrator m) {
    switch (m) {
        case Integrator::MagnusCF4: return "cf4";
        case Integrator::RungeKutta4: return "rk4";
        case Integrator::Adaptive: return "adaptive";
    }
    return "cf4";
}

Integrator parse_integrator(const Entry& e) {
    for (auto m : {Integrator::MagnusCF4, Integrator::RungeKutta4, Integrator::Adaptive}) {
        if (integrator_name(m) == e.value) return m;
    }
    e.fail("unknown integrator '" + e.value + "' (expected cf4, rk4 or adaptive)");
}

using Handler = std::function<void(const Entry&, RunConfig&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = [] {
        std::map<std::string, Handler> h;
        // experiment.type is handled by the parser itself.
        h["physics.mass"] = [](const Entry& e, RunConfig& c) { c.physics.mass_u = positive(e, parse_mass_u(e, e.value)); };
        h["physics.omega_x"] = [](const Entry& e, RunConfig& c) { c.physics.omega_x_hz = positive(e, parse_frequency(e, e.value)); };
        h["physics.omega_y"] = [](const Entry& e, RunConfig& c) { c.physics.omega_y_hz = positive(e, parse_frequency(e, e.value)); };
        h["physics.omega_z"] = [](const Entry& e, RunConfig& c) { c.physics.omega_z_hz = positive(e, parse_frequency(e, e.value)); };
        h["physics.wavelength"] = [](const Entry& e, RunConfig& c) { c.physics.wavelength_m = positive(e, parse_length(e, e.value)); };
        h["physics.geometry_factor"] = [](const Entry& e, RunConfig& c) { c.physics.geometry_factor = positive(e, parse_real(e, e.value)); };
        h["physics.stark_shift"] = [](const Entry& e, RunConfig& c) { c.physics.stark_hz = parse_frequency(e, e.value); };
        h["physics.omega_r"] = [](const Entry& e, RunConfig& c) { c.physics.running_hz = parse_frequency(e, e.value); };
        h["physics.rabi"] = [](const Entry& e, RunConfig& c) { c.physics.rabi_hz = non_negative(e, parse_frequency(e, e.value)); };
        h["physics.detuning"] = [](const Entry& e, RunConfig& c) { c.physics.detuning_hz = parse_frequency(e, e.value); };
        h["physics.t2"] = [](const Entry& e, RunConfig& c) { c.physics.t2_s = non_negative(e, parse_time(e, e.value)); };

        h["simulation.fock_levels"] = [](const Entry& e, RunConfig& c) { c.simulation.fock_levels = int_at_least(e, 2); };
        h["simulation.order"] = [](const Entry& e, RunConfig& c) {
            c.simulation.order = wrap(e, [&] { return parse_expansion_order(e.value); });
        };
        h["simulation.integrator"] = [](const Entry& e, RunConfig& c) { c.simulation.integrator = parse_integrator(e); };
        h["simulation.steps_per_period"] = [](const Entry& e, RunConfig& c) { c.simulation.steps_per_period = int_at_least(e, 1); };
        h["simulation.window"] = [](const Entry& e, RunConfig& c) {
            const long long v = parse_integer(e, e.value);
            if (v < -1 || v > 1000000) e.fail("must be -1 (whole space) or >= 0");
            c.simulation.window = static_cast<int>(v);
        };
        h["simulation.nbar0"] = [](const Entry& e, RunConfig& c) { c.simulation.nbar0 = non_negative(e, parse_real(e, e.value)); };
        h["simulation.seed"] = [](const Entry& e, RunConfig& c) {
            const long long v = parse_integer(e, e.value);
            if (v < 0) e.fail("seed must be >= 0");
            c.simulation.seed = static_cast<std::uint64_t>(v);
        };
        h["simulation.noise"] = [](const Entry& e, RunConfig& c) {
            for (auto n : {NoiseModel::None, NoiseModel::Gaussian, NoiseModel::Binomial}) {
                if (to_string(n) == e.value) {
                    c.simulation.noise = n;
                    return;
                }
            }
            e.fail("unknown noise model '" + e.value + "' (expected none, gaussian or binomial)");
        };
        h["simulation.noise_sigma"] = [](const Entry& e, RunConfig& c) { c.simulation.noise_sigma = non_negative(e, parse_real(e, e.value)); };
        h["simulation.shots"] = [](const Entry& e, RunConfig& c) { c.simulation.shots = int_at_least(e, 1); };

        h["spectrum.start"] = [](const Entry& e, RunConfig& c) { c.spectrum.start_hz = parse_frequency(e, e.value); };
        h["spectrum.stop"] = [](const Entry& e, RunConfig& c) { c.spectrum.stop_hz = parse_frequency(e, e.value); };
        h["spectrum.points"] = [](const Entry& e, RunConfig& c) { c.spectrum.points = int_at_least(e, 2); };
        h["spectrum.pulse"] = [](const Entry& e, RunConfig& c) { c.spectrum.pulse_s = positive(e, parse_time(e, e.value)); };
        h["spectrum.prominence"] = [](const Entry& e, RunConfig& c) { c.spectrum.prominence = probability(e, parse_real(e, e.value)); };
        h["spectrum.dephasing"] = [](const Entry& e, RunConfig& c) { c.spectrum.dephasing = parse_bool(e, e.value); };

        h["rabi.detuning"] = [](const Entry& e, RunConfig& c) { c.rabi.detuning_hz = parse_frequency(e, e.value); };
        h["rabi.model"] = [](const Entry& e, RunConfig& c) { c.rabi.model = wrap(e, [&] { return parse_model_kind(e.value); }); };
        h["rabi.branch"] = [](const Entry& e, RunConfig& c) {
            c.rabi.branch = wrap(e, [&] { return parse_sideband_branch(e.value); });
        };
        h["rabi.duration"] = [](const Entry& e, RunConfig& c) { c.rabi.duration_s = positive(e, parse_time(e, e.value)); };
        h["rabi.light_shift"] = [](const Entry& e, RunConfig& c) { c.rabi.light_shift = parse_bool(e, e.value); };
        h["rabi.samples"] = [](const Entry& e, RunConfig& c) { c.rabi.samples = int_at_least(e, 2); };

        h["rabi_scan.omega_r"] = [](const Entry& e, RunConfig& c) {
            std::vector<double> v;
            for (const auto& item : split_list(e.value)) v.push_back(parse_frequency(e, item));
            if (v.empty()) e.fail("needs at least one frequency");
            c.rabi_scan.running_hz = std::move(v);
        };
        h["rabi_scan.branches"] = [](const Entry& e, RunConfig& c) {
            std::vector<SidebandBranch> v;
            for (const auto& item : split_list(e.value)) v.push_back(wrap(e, [&] { return parse_sideband_branch(item); }));
            if (v.empty()) e.fail("needs at least one branch");
            c.rabi_scan.branches = std::move(v);
        };
        h["rabi_scan.samples"] = [](const Entry& e, RunConfig& c) { c.rabi_scan.samples = int_at_least(e, kMinFitPoints); };
        h["rabi_scan.periods"] = [](const Entry& e, RunConfig& c) { c.rabi_scan.periods = positive(e, parse_real(e, e.value)); };
        h["rabi_scan.c1_periods"] = [](const Entry& e, RunConfig& c) { c.rabi_scan.c1_periods = positive(e, parse_real(e, e.value)); };

        h["cool.pulses"] = [](const Entry& e, RunConfig& c) { c.cool.pulses = int_at_least(e, 1); };
        h["cool.first_pulse"] = [](const Entry& e, RunConfig& c) { c.cool.first_s = positive(e, parse_time(e, e.value)); };
        h["cool.last_pulse"] = [](const Entry& e, RunConfig& c) { c.cool.last_s = positive(e, parse_time(e, e.value)); };
        h["cool.repump"] = [](const Entry& e, RunConfig& c) { c.cool.repump_s = non_negative(e, parse_time(e, e.value)); };
        h["cool.detuning"] = [](const Entry& e, RunConfig& c) { c.cool.detuning_hz = parse_frequency(e, e.value); };
        h["cool.model"] = [](const Entry& e, RunConfig& c) { c.cool.model = wrap(e, [&] { return parse_model_kind(e.value); }); };
        h["cool.probe_before"] = [](const Entry& e, RunConfig& c) { c.cool.probe_before_s = positive(e, parse_time(e, e.value)); };
        h["cool.probe_after"] = [](const Entry& e, RunConfig& c) { c.cool.probe_after_s = positive(e, parse_time(e, e.value)); };
        h["cool.probe_span"] = [](const Entry& e, RunConfig& c) { c.cool.probe_span_hz = positive(e, parse_frequency(e, e.value)); };
        h["cool.light_shift"] = [](const Entry& e, RunConfig& c) { c.cool.light_shift = parse_bool(e, e.value); };
        h["cool.probe_points"] = [](const Entry& e, RunConfig& c) { c.cool.probe_points = int_at_least(e, 2); };

        h["thermo.mode"] = [](const Entry& e, RunConfig& c) {
            if (e.value == "direct") {
                c.thermo.mode = ThermoSection::Mode::Direct;
            } else if (e.value == "simulate") {
                c.thermo.mode = ThermoSection::Mode::Simulate;
            } else {
                e.fail("unknown mode '" + e.value + "' (expected direct or simulate)");
            }
        };
        auto prob_list = [](const Entry& e) {
            std::vector<double> v;
            for (const auto& item : split_list(e.value)) v.push_back(probability(e, parse_real(e, item)));
            return v;
        };
        h["thermo.p_red"] = [prob_list](const Entry& e, RunConfig& c) { c.thermo.p_red = prob_list(e); };
        h["thermo.p_blue"] = [prob_list](const Entry& e, RunConfig& c) { c.thermo.p_blue = prob_list(e); };
        h["thermo.nbar"] = [](const Entry& e, RunConfig& c) {
            std::vector<double> v;
            for (const auto& item : split_list(e.value)) v.push_back(non_negative(e, parse_real(e, item)));
            if (v.empty()) e.fail("needs at least one value");
            c.thermo.nbar = std::move(v);
        };
        h["thermo.pulse"] = [](const Entry& e, RunConfig& c) { c.thermo.pulse_s = positive(e, parse_time(e, e.value)); };

        h["output.dir"] = [](const Entry& e, RunConfig& c) {
            if (e.value.empty()) e.fail("output directory must not be empty");
            c.output.dir = e.value;
        };
        return h;
    }();
    return table;
}

const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"experiment", "physics", "simulation", "spectrum", "rabi",
                                         "rabi_scan",  "cool",    "thermo",     "output"};
    return s;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment_override) {
    RunConfig cfg;
    std::map<std::string, int> seen;  // key -> line
    std::string section;
    bool saw_experiment_section = false;
    std::optional<Experiment> selector;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigParseError("", line_no, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_sections().count(section)) throw ConfigParseError(section, line_no, "unknown section");
            if (section == "experiment") saw_experiment_section = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigParseError("", line_no, "expected 'key = value', got '" + line + "'");
        if (section.empty()) throw ConfigParseError(trim(line.substr(0, eq)), line_no, "key outside any [section]");
        Entry e{section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (auto it = seen.find(e.key); it != seen.end()) {
            e.fail("duplicate key (first set on line " + std::to_string(it->second) + ")");
        }
        seen[e.key] = line_no;
        if (e.value.empty()) e.fail("empty value");
        if (e.key == "experiment.type") {
            selector = wrap(e, [&] { return parse_experiment(e.value); });
            continue;
        }
        const auto& table = handlers();
        auto h = table.find(e.key);
        if (h == table.end()) e.fail("unknown key");
        h->second(e, cfg);
    }

    if (experiment_override) {
        cfg.experiment = *experiment_override;
    } else if (selector) {
        cfg.experiment = *selector;
    } else {
        throw ConfigParseError("experiment.type", 0,
                               saw_experiment_section ? "missing experiment selector in the [experiment] section"
                                                      : "missing experiment selector ([experiment] type = ...)");
    }

    if (!seen.count("cool.detuning")) cfg.cool.detuning_hz = cfg.physics.running_hz - cfg.physics.omega_z_hz;

    // cross-field checks
    auto line_of = [&](const std::string& key) { return seen.count(key) ? seen.at(key) : 0; };
    if (!(cfg.spectrum.stop_hz > cfg.spectrum.start_hz)) {
        throw ConfigParseError("spectrum.stop", line_of("spectrum.stop"), "must exceed spectrum.start");
    }
    if (cfg.thermo.p_red.size() != cfg.thermo.p_blue.size()) {
        throw ConfigParseError("thermo.p_blue", line_of("thermo.p_blue"), "p_red and p_blue need the same length");
    }
    if (cfg.experiment == Experiment::Thermometry && cfg.thermo.mode == ThermoSection::Mode::Direct &&
        cfg.thermo.p_red.empty()) {
        throw ConfigParseError("thermo.p_red", 0, "direct mode needs p_red and p_blue");
    }
    try {
        require_physical(cfg.physics.physical());
    } catch (const ConfigurationError& ex) {
        throw ConfigParseError("physics", 0, ex.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Experiment> experiment_override) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigurationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), experiment_override);
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream o;
    auto q = [](double v, const char* unit) { return format_double(v) + " " + unit; };
    auto list = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& it : items) s += (s.empty() ? "" : ", ") + fmt(it);
        return s;
    };
    const auto& p = c.physics;
    const auto& s = c.simulation;
    o << "[experiment]\n"
      << "type = " << to_string(c.experiment) << "\n\n";
    o << "[physics]\n"
      << "mass = " << q(p.mass_u, "u") << "\n"
      << "omega_x = " << q(p.omega_x_hz, "Hz") << "\n"
      << "omega_y = " << q(p.omega_y_hz, "Hz") << "\n"
      << "omega_z = " << q(p.omega_z_hz, "Hz") << "\n"
      << "wavelength = " << q(p.wavelength_m, "m") << "\n"
      << "geometry_factor = " << format_double(p.geometry_factor) << "\n"
      << "stark_shift = " << q(p.stark_hz, "Hz") << "\n"
      << "omega_r = " << q(p.running_hz, "Hz") << "\n"
      << "rabi = " << q(p.rabi_hz, "Hz") << "\n"
      << "detuning = " << q(p.detuning_hz, "Hz") << "\n"
      << "t2 = " << q(p.t2_s, "s") << "\n\n";
    o << "[simulation]\n"
      << "fock_levels = " << s.fock_levels << "\n"
      << "order = " << to_string(s.order) << "\n"
      << "integrator = " << integrator_name(s.integrator) << "\n"
      << "steps_per_period = " << s.steps_per_period << "\n"
      << "window = " << s.window << "\n"
      << "nbar0 = " << format_double(s.nbar0) << "\n"
      << "seed = " << s.seed << "\n"
      << "noise = " << to_string(s.noise) << "\n"
      << "noise_sigma = " << format_double(s.noise_sigma) << "\n"
      << "shots = " << s.shots << "\n\n";
    o << "[spectrum]\n"
      << "start = " << q(c.spectrum.start_hz, "Hz") << "\n"
      << "stop = " << q(c.spectrum.stop_hz, "Hz") << "\n"
      << "points = " << c.spectrum.points << "\n"
      << "pulse = " << q(c.spectrum.pulse_s, "s") << "\n"
      << "prominence = " << format_double(c.spectrum.prominence) << "\n"
      << "dephasing = " << (c.spectrum.dephasing ? "true" : "false") << "\n\n";
    o << "[rabi]\n"
      << "detuning = " << q(c.rabi.detuning_hz, "Hz") << "\n"
      << "model = " << to_string(c.rabi.model) << "\n"
      << "branch = " << to_string(c.rabi.branch) << "\n"
      << "duration = " << q(c.rabi.duration_s, "s") << "\n"
      << "samples = " << c.rabi.samples << "\n"
      << "light_shift = " << (c.rabi.light_shift ? "true" : "false") << "\n\n";
    o << "[rabi_scan]\n"
      << "omega_r = " << list(c.rabi_scan.running_hz, [&](double v) { return q(v, "Hz"); }) << "\n"
      << "branches = " << list(c.rabi_scan.branches, [](SidebandBranch b) { return to_string(b); }) << "\n"
      << "samples = " << c.rabi_scan.samples << "\n"
      << "periods = " << format_double(c.rabi_scan.periods) << "\n"
      << "c1_periods = " << format_double(c.rabi_scan.c1_periods) << "\n\n";
    o << "[cool]\n"
      << "pulses = " << c.cool.pulses << "\n"
      << "first_pulse = " << q(c.cool.first_s, "s") << "\n"
      << "last_pulse = " << q(c.cool.last_s, "s") << "\n"
      << "repump = " << q(c.cool.repump_s, "s") << "\n"
      << "detuning = " << q(c.cool.detuning_hz, "Hz") << "\n"
      << "model = " << to_string(c.cool.model) << "\n"
      << "probe_before = " << q(c.cool.probe_before_s, "s") << "\n"
      << "probe_after = " << q(c.cool.probe_after_s, "s") << "\n"
      << "probe_span = " << q(c.cool.probe_span_hz, "Hz") << "\n"
      << "probe_points = " << c.cool.probe_points << "\n"
      << "light_shift = " << (c.cool.light_shift ? "true" : "false") << "\n\n";
    o << "[thermo]\n"
      << "mode = " << (c.thermo.mode == ThermoSection::Mode::Direct ? "direct" : "simulate") << "\n";
    if (!c.thermo.p_red.empty()) {
        o << "p_red = " << list(c.thermo.p_red, format_double) << "\n"
          << "p_blue = " << list(c.thermo.p_blue, format_double) << "\n";
    }
    o << "nbar = " << list(c.thermo.nbar, format_double) << "\n"
      << "pulse = " << q(c.thermo.pulse_s, "s") << "\n\n";
    o << "[output]\n"
      << "dir = " << c.output.dir << "\n";
    return o.str();
}

}  // namespace ionlattice
