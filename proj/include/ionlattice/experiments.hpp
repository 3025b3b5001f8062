#pragma once

// End-to-end simulations of the three measurements: the microwave detuning
// spectrum, Rabi frequencies versus lattice frequency, and resolved-sideband
// cooling with sideband-asymmetry thermometry.

#include "ionlattice/dynamics.hpp"
#include "ionlattice/effective.hpp"
#include "ionlattice/fitting.hpp"
#include "ionlattice/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ionlattice {

enum class ModelKind { Full, Effective };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

// Numerical knobs shared by the experiments.
struct SimulationSettings {
    int fock_levels = 160;
    ExpansionOrder order = ExpansionOrder::FirstOrder;
    Integrator method = Integrator::MagnusCF4;
    int steps_per_period = 20;
    int window_half_width = 6;  // see ThermalAverageOptions
    int jobs = 1;
};

struct PulseSpec {
    double detuning = 0.0;  // rad/s; ignored by the effective model (on resonance by construction)
    double duration = 0.0;  // s
    ModelKind model = ModelKind::Full;
    SidebandBranch branch = SidebandBranch::BlueMinus;  // effective model only

    void validate() const;
};

// ---------------------------------------------------------------- spectrum

struct Peak {
    std::size_t index;
    double detuning;  // rad/s
    double height;
    double prominence;
};

inline constexpr double kDefaultPeakProminence = 0.05;

// Local maxima whose topographic prominence is at least min_prominence.
// Non-finite samples split the trace. Plateaus report their left edge.
std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double min_prominence = kDefaultPeakProminence);

struct SpectrumOptions {
    SimulationSettings sim;
    double prominence = kDefaultPeakProminence;
    // The thermal fast path's dephasing envelope pulls every point toward
    // 1/2, which is wrong far from resonance; spectra are coherent unless asked.
    bool apply_dephasing = false;
};

struct SpectrumResult {
    std::vector<double> detunings;    // rad/s, strictly increasing
    std::vector<double> populations;  // P1; NaN where the point failed
    std::vector<std::string> errors;  // per point, empty on success
    std::vector<Peak> peaks;
    std::vector<std::string> warnings;
    double pulse_duration = 0.0;
    double nbar0 = 0.0;
    PhysicalConfig config;

    std::size_t failed_points() const;
};

SpectrumResult sideband_spectrum(const PhysicalConfig& cfg, std::span<const double> grid, double pulse_duration,
                                 double nbar0, const SpectrumOptions& options = {});

// Evenly spaced grid from first to last inclusive.
std::vector<double> linear_grid(double first, double last, std::size_t count);

// ---------------------------------------------------------------- Rabi traces

// P1 on the duration grid for a thermal initial state. The full model drives
// at pulse.detuning; the effective model uses the branch Hamiltonian.
TrajectoryResult rabi_trace(const PhysicalConfig& cfg, const PulseSpec& pulse, std::span<const double> durations,
                            double nbar0, const SimulationSettings& sim = {});

struct RabiScanPoint {
    double running_freq = 0.0;  // rad/s
    SidebandBranch branch = SidebandBranch::BlueMinus;
    std::optional<double> measured;  // fitted Rabi frequency, rad/s
    double measured_uncertainty = 0.0;
    std::optional<double> predicted;  // closed form, rad/s
    bool fit_converged = false;
    double fitted_nbar = 0.0;  // thermal fits only
    std::string error;         // simulation/fit failure or prediction singularity
    std::vector<double> trace_times;
    std::vector<double> trace_populations;
};

struct RabiScanOptions {
    SimulationSettings sim;
    double nbar0 = 18.0;
    int samples = 120;
    // Trace length in units of the predicted n = 0 Rabi period (thermal
    // fits) or of the C1 period (damped-sinusoid fits).
    double periods = 1.0;
    double c1_periods = 3.0;
    double fallback_duration = 500e-6;  // s, when no prediction exists
};

// For each running frequency and branch: simulate a full-model trace at the
// branch resonance, fit it (thermal model for sidebands, damped sinusoid for
// C1) and pair it with the closed-form prediction.
std::vector<RabiScanPoint> rabi_vs_lattice_frequency(const PhysicalConfig& cfg, std::span<const double> running_freqs,
                                                     std::span<const SidebandBranch> branches,
                                                     const RabiScanOptions& options = {});

// ---------------------------------------------------------------- cooling

// Spin to |0>, motional populations kept, coherences dropped.
JointState optical_pumping_reset(const JointState& state);
// Same on P(s, n) in index order (length 2N).
std::vector<double> optical_pumping_reset(std::span<const double> populations);

struct CoolingSchedule {
    int pulse_count = 200;
    double first_duration = 60e-6;   // s
    double last_duration = 230e-6;   // s
    double repump_duration = 5e-6;   // s, bookkeeping only
    double detuning = units::angular_khz(-490.0);

    // Red-minus resonance for cfg: delta = omega_r - omega_z.
    static CoolingSchedule for_config(const PhysicalConfig& cfg);

    // Duration of pulse k (0-based), linear in k.
    double pulse_duration(int k) const;
    double total_time() const;
    void validate() const;
};

struct CoolingOptions {
    ModelKind model = ModelKind::Effective;
    SimulationSettings sim;  // full model; sim.fock_levels also bounds the effective model
    // 0: pick the smallest N (>= sim.fock_levels) whose thermal tail is below 1e-6.
    int fock_levels = 0;
    // Sideband probes before / after cooling.
    double probe_before = 80e-6;
    double probe_after = 230e-6;
    double probe_span = units::angular_khz(40.0);  // +- around each sideband
    int probe_points = 81;
    // Full model: shift the drive by the carrier light shift so the pulses
    // sit on the dressed sideband line (see resonant_detuning).
    bool track_light_shift = true;
};

// Thermal tail mass above which cooling refuses to run.
inline constexpr double kCoolingTruncationLimit = 1e-3;

// Effective-model R1 / B1 (minus branch) lineshapes.
struct SidebandProbe {
    std::vector<double> offsets;  // rad/s from each sideband centre
    std::vector<double> red;      // P1 at red_center + offset
    std::vector<double> blue;     // P1 at blue_center + offset
    double red_center = 0.0;      // -(omega_z - omega_r)
    double blue_center = 0.0;     // +(omega_z - omega_r)
    double duration = 0.0;
};

struct ThermometryResult {
    double nbar = 0.0;
    double ratio = 0.0;
    bool valid = false;
    std::string flag;  // "", "undefined", "non_thermal", "out_of_range"
};

ThermometryResult sideband_asymmetry_thermometry(double p_red, double p_blue);

struct CoolingResult {
    double initial_nbar = 0.0;
    std::vector<double> nbar;  // after each pulse + reset
    std::vector<double> phonon_populations;  // final p_n
    int fock_levels = 0;
    SidebandProbe before;
    SidebandProbe after;
    ThermometryResult thermometry;  // from the resonant points of `after`
    std::vector<std::string> warnings;

    double final_nbar() const { return nbar.empty() ? initial_nbar : nbar.back(); }
    JointState final_state() const;
};

CoolingResult sideband_cooling(const PhysicalConfig& cfg, const CoolingSchedule& schedule, double nbar0,
                               const CoolingOptions& options = {});

// Effective-model sideband excitation of an incoherent phonon distribution
// (spin in |0>) with exact two-level dynamics per n, including dephasing.
// offset is the drive detuning from the sideband resonance (rad/s).
double effective_sideband_probe(const PhysicalConfig& cfg, std::span<const double> phonon_probs, bool red,
                                double duration, double offset = 0.0);

// ---------------------------------------------------------------- noise

// Gaussian noise of standard deviation sigma, clipped to [0, 1].
std::vector<double> add_gaussian_noise(std::span<const double> values, double sigma, std::uint64_t seed);
// Each value replaced by k / shots with k ~ Binomial(shots, value).
std::vector<double> add_binomial_noise(std::span<const double> values, int shots, std::uint64_t seed);

inline constexpr int kDefaultShots = 100;

}  // namespace ionlattice
