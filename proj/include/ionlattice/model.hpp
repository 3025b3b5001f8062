#pragma once

// Physical parameters of the ion + running lattice + microwave system and the
// interaction-picture Hamiltonians built from them. All frequencies are
// angular (rad/s); Hamiltonians are returned divided by hbar (rad/s).

#include "ionlattice/hilbert.hpp"
#include "ionlattice/spin_motion_operator.hpp"
#include "ionlattice/units.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ionlattice {

struct PhysicalConfig {
    double ion_mass = 171.0 * units::kAtomicMassUnit;  // kg
    double omega_x = units::angular(0.91e6);          // stored only
    double omega_y = units::angular(0.97e6);          // stored only
    double omega_z = units::angular(0.79e6);          // simulated mode
    double lattice_wavelength = 377.2e-9;             // m
    double lattice_geometry_factor = std::sqrt(2.0);  // delta_k = g * 2 pi / lambda
    double stark_amplitude = units::angular(310e3);   // Delta omega_0, signed
    double running_freq = units::angular(300e3);      // omega_r
    double microwave_rabi = units::angular(43e3);     // Omega
    double microwave_detuning = 0.0;                  // delta = omega_mu - omega_0, signed
    double coherence_time = 0.47e-3;                  // T2 in s; 0 disables dephasing

    double delta_k() const { return lattice_geometry_factor * units::kTwoPi / lattice_wavelength; }
    bool has_dephasing() const { return coherence_time > 0.0 && std::isfinite(coherence_time); }
};

enum class ExpansionOrder {
    FirstOrder,   // Lamb-Dicke expansion to first order in z
    SecondOrder,  // adds the eta^2 term of the sine expansion
    Exact,        // full sin(delta_k z - omega_r t) via the spectrum of z
};

std::string to_string(ExpansionOrder order);
ExpansionOrder parse_expansion_order(const std::string& text);

// eta = delta_k * sqrt(hbar / (2 m omega_z))
double lamb_dicke(const PhysicalConfig& cfg);

// Differential Stark shift Delta omega_0 * sin(delta_k z - omega_r t), rad/s.
double stark_profile(double z, double t, const PhysicalConfig& cfg);

// Time-dependent interaction-picture Hamiltonian (rotating-wave microwave
// drive) in structured form. For ExpansionOrder::Exact, max_occupied_phonon
// (when >= 0) must satisfy N >= 1.5 * max_occupied_phonon.
SpinMotionOperator interaction_operator(const PhysicalConfig& cfg, const HilbertDims& dims, ExpansionOrder order,
                                        int max_occupied_phonon = -1);

// Dense H_i(t)/hbar.
OperatorMatrix interaction_hamiltonian(double t, const PhysicalConfig& cfg, const HilbertDims& dims,
                                       ExpansionOrder order);

struct ConfigIssue {
    enum class Severity {
        Warning,               // simulation runs; approximations may be poor
        EffectiveModelError,   // closed-form effective model unusable
        Error,                 // nonphysical, nothing can run
    };
    Severity severity;
    std::string code;
    std::string message;
};

inline constexpr double kLambDickeLimit = 0.5;
inline constexpr double kEffectiveRegimeLimit = 0.5;

std::vector<ConfigIssue> validate_config(const PhysicalConfig& cfg);

// Throws ConfigurationError listing every Severity::Error issue.
void require_physical(const PhysicalConfig& cfg);

}  // namespace ionlattice
