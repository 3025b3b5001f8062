#pragma once

// Static effective Hamiltonians obtained after the rotating-wave approximation
// at the carrier-sideband (C1) and first motional sideband resonances, and the
// parameter-free Rabi-frequency predictions that follow from them.
//
// Rabi frequencies are angular frequencies of the population oscillation
// P(t) = sin^2(Omega_R t / 2), i.e. twice the coupling matrix element.

#include "ionlattice/errors.hpp"
#include "ionlattice/hilbert.hpp"
#include "ionlattice/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ionlattice {

// Selects the omega_z - omega_r (Minus) or omega_z + omega_r (Plus) denominator.
enum class LatticeSign { Minus, Plus };

enum class SidebandBranch {
    CarrierC1,  // delta = +omega_r
    RedMinus,   // delta = -(omega_z - omega_r)
    RedPlus,    // delta = -(omega_z + omega_r)
    BlueMinus,  // delta = +(omega_z - omega_r)
    BluePlus,   // delta = +(omega_z + omega_r)
};

std::string to_string(SidebandBranch branch);
SidebandBranch parse_sideband_branch(const std::string& text);
bool is_red(SidebandBranch branch);
bool is_blue(SidebandBranch branch);
LatticeSign lattice_sign(SidebandBranch branch);

// Thrown when |omega_r - omega_z| falls inside the guard band around the
// minus-branch resonance.
class ResonanceGuardError : public ResonanceError {
  public:
    using ResonanceError::ResonanceError;
};

inline constexpr double kResonanceGuardBand = units::angular_khz(10.0);

struct EffectiveParams {
    double eta_eff_minus;  // signed
    double eta_eff_plus;   // signed
    double omega_c1;       // rad/s, Delta omega_0 Omega / (2 omega_r)
    double red_minus_coupling;   // matrix elements of the effective Hamiltonians, rad/s
    double red_plus_coupling;
    double blue_minus_coupling;
    double blue_plus_coupling;
};

// eta * Delta omega_0 / (2 (omega_z +/- omega_r)), signed.
double effective_lamb_dicke(const PhysicalConfig& cfg, LatticeSign sign);

EffectiveParams effective_params(const PhysicalConfig& cfg);

// Microwave detuning that puts the drive on resonance with the branch.
double branch_detuning(const PhysicalConfig& cfg, SidebandBranch branch);

// Differential ac Stark shift of the spin transition (rad/s) from the
// off-resonant carrier tones of the full Hamiltonian at microwave detuning
// `detuning`: sum_k J_k(beta)^2 Omega^2 / (2 (detuning - k omega_r)),
// beta = Delta omega_0 / omega_r. Tones within the guard band are skipped.
double carrier_light_shift(const PhysicalConfig& cfg, double detuning);

// branch_detuning corrected by carrier_light_shift: where the full model is
// actually on resonance. The effective Hamiltonians neglect this shift.
double resonant_detuning(const PhysicalConfig& cfg, SidebandBranch branch);

OperatorMatrix carrier_c1_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims);
OperatorMatrix red_sideband_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, LatticeSign sign);
OperatorMatrix blue_sideband_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, LatticeSign sign);
OperatorMatrix branch_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, SidebandBranch branch);

// n-independent Rabi prefactor: Omega_C1 for the carrier sideband, |eta_eff| Omega otherwise.
double predicted_rabi(const PhysicalConfig& cfg, SidebandBranch branch);

struct RabiPrediction {
    double running_freq;          // rad/s
    std::optional<double> rabi;   // rad/s; empty at singular points
    std::string error;            // reason for an empty value
};

std::vector<RabiPrediction> predicted_rabi_curve(const PhysicalConfig& cfg, std::span<const double> running_freqs,
                                                 SidebandBranch branch);

}  // namespace ionlattice
