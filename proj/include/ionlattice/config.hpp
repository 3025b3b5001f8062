#pragma once

// Run configuration: a flat, sectioned key = value text format.
//
//   [physics]
//   omega_r = 300 kHz      # frequencies are ordinary (Hz), unit suffix required
//   t2 = 0.47 ms
//
// Values are stored in canonical units (Hz, s, m, atomic mass units) exactly
// as parsed, so echo_config() round-trips bit for bit. Conversion to angular
// frequencies happens in PhysicsSection::physical().

#include "ionlattice/dynamics.hpp"
#include "ionlattice/effective.hpp"
#include "ionlattice/errors.hpp"
#include "ionlattice/experiments.hpp"
#include "ionlattice/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ionlattice {

// Configuration error tied to a key ("section.key") and a line (0 if none).
class ConfigParseError : public ConfigurationError {
  public:
    ConfigParseError(std::string key, int line, const std::string& what);
    const std::string& key() const { return key_; }
    int line() const { return line_; }

  private:
    std::string key_;
    int line_;
};

enum class Experiment { Spectrum, Rabi, RabiScan, Cool, Thermometry };

std::string to_string(Experiment e);
// Accepts spectrum, rabi, rabi-scan, cool, thermo / thermometry.
Experiment parse_experiment(const std::string& text);

enum class NoiseModel { None, Gaussian, Binomial };
std::string to_string(NoiseModel n);

struct PhysicsSection {
    double mass_u = 171.0;
    double omega_x_hz = 910e3;
    double omega_y_hz = 970e3;
    double omega_z_hz = 790e3;
    double wavelength_m = 377.2e-9;
    double geometry_factor = 1.4142135623730951;
    double stark_hz = 310e3;
    double running_hz = 300e3;
    double rabi_hz = 43e3;
    double detuning_hz = 0.0;
    double t2_s = 0.47e-3;  // 0 disables dephasing

    PhysicalConfig physical() const;
    bool operator==(const PhysicsSection&) const = default;
};

struct SimulationSection {
    int fock_levels = 160;
    ExpansionOrder order = ExpansionOrder::FirstOrder;
    Integrator integrator = Integrator::MagnusCF4;
    int steps_per_period = 20;
    int window = 6;
    double nbar0 = 18.0;
    std::uint64_t seed = 0;
    NoiseModel noise = NoiseModel::None;
    double noise_sigma = 0.05;
    int shots = kDefaultShots;

    SimulationSettings settings(int jobs) const;
    bool operator==(const SimulationSection&) const = default;
};

struct SpectrumSection {
    double start_hz = -1150e3;
    double stop_hz = 1150e3;
    int points = 461;
    double pulse_s = 75e-6;
    double prominence = kDefaultPeakProminence;
    bool dephasing = false;
    bool operator==(const SpectrumSection&) const = default;
};

struct RabiSection {
    double detuning_hz = 490e3;
    ModelKind model = ModelKind::Full;
    SidebandBranch branch = SidebandBranch::BlueMinus;
    double duration_s = 600e-6;
    int samples = 200;
    bool light_shift = true;  // full model: drive at detuning minus the carrier light shift
    bool operator==(const RabiSection&) const = default;
};

struct RabiScanSection {
    std::vector<double> running_hz{200e3, 300e3, 400e3, 500e3, 600e3, 700e3, 900e3, 1100e3};
    std::vector<SidebandBranch> branches{SidebandBranch::BlueMinus, SidebandBranch::BluePlus,
                                         SidebandBranch::CarrierC1};
    int samples = 120;
    double periods = 1.0;
    double c1_periods = 3.0;
    bool operator==(const RabiScanSection&) const = default;
};

struct CoolSection {
    int pulses = 200;
    double first_s = 60e-6;
    double last_s = 230e-6;
    double repump_s = 5e-6;
    double detuning_hz = -490e3;  // resolved to omega_r - omega_z when absent
    ModelKind model = ModelKind::Effective;
    double probe_before_s = 80e-6;
    double probe_after_s = 230e-6;
    double probe_span_hz = 40e3;
    int probe_points = 81;
    bool light_shift = true;  // full model, as in RabiSection

    CoolingSchedule schedule() const;
    bool operator==(const CoolSection&) const = default;
};

struct ThermoSection {
    enum class Mode { Direct, Simulate };
    Mode mode = Mode::Simulate;
    std::vector<double> p_red;   // direct mode
    std::vector<double> p_blue;  // direct mode
    std::vector<double> nbar{0.02, 1.0, 18.0};  // simulate mode
    double pulse_s = 230e-6;
    bool operator==(const ThermoSection&) const = default;
};

struct OutputSection {
    std::string dir = "results";
    bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
    Experiment experiment = Experiment::Spectrum;
    PhysicsSection physics;
    SimulationSection simulation;
    SpectrumSection spectrum;
    RabiSection rabi;
    RabiScanSection rabi_scan;
    CoolSection cool;
    ThermoSection thermo;
    OutputSection output;

    bool operator==(const RunConfig&) const = default;
};

// Parses and validates. `experiment_override` (the CLI command) replaces or
// supplies experiment.type.
RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment_override = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<Experiment> experiment_override = std::nullopt);

// Every resolved field, defaults included, in canonical units.
std::string echo_config(const RunConfig& cfg);

// Shortest decimal text that reads back as the same double.
std::string format_double(double v);

}  // namespace ionlattice
