#include "ionlattice/effective.hpp"

#include "ionlattice/errors.hpp"

#include <cmath>
#include <sstream>

namespace ionlattice {

namespace {

double sideband_denominator(const PhysicalConfig& cfg, LatticeSign sign) {
    if (sign == LatticeSign::Plus) return cfg.omega_z + cfg.running_freq;
    const double d = cfg.omega_z - cfg.running_freq;
    if (d == 0.0) {
        throw ResonanceError("omega_z - omega_r = 0: minus-branch effective Hamiltonian is singular");
    }
    if (std::abs(d) < kResonanceGuardBand) {
        std::ostringstream msg;
        msg << "|omega_r - omega_z| / 2pi = " << units::to_khz(std::abs(d))
            << " kHz lies inside the 10 kHz resonance guard band of the effective model";
        throw ResonanceGuardError(msg.str());
    }
    return d;
}

// Coupling g of the effective sideband Hamiltonians; Rabi frequency is 2|g|.
double sideband_coupling(const PhysicalConfig& cfg, LatticeSign sign) {
    const double eta = lamb_dicke(cfg);
    return cfg.stark_amplitude * eta * cfg.microwave_rabi / (4.0 * sideband_denominator(cfg, sign));
}

}  // namespace

std::string to_string(SidebandBranch branch) {
    switch (branch) {
        case SidebandBranch::CarrierC1: return "c1";
        case SidebandBranch::RedMinus: return "red_minus";
        case SidebandBranch::RedPlus: return "red_plus";
        case SidebandBranch::BlueMinus: return "blue_minus";
        case SidebandBranch::BluePlus: return "blue_plus";
    }
    return "c1";
}

SidebandBranch parse_sideband_branch(const std::string& text) {
    for (auto b : {SidebandBranch::CarrierC1, SidebandBranch::RedMinus, SidebandBranch::RedPlus,
                   SidebandBranch::BlueMinus, SidebandBranch::BluePlus}) {
        if (to_string(b) == text) return b;
    }
    throw ConfigurationError("unknown sideband branch '" + text +
                             "' (expected c1, red_minus, red_plus, blue_minus or blue_plus)");
}

bool is_red(SidebandBranch branch) { return branch == SidebandBranch::RedMinus || branch == SidebandBranch::RedPlus; }

bool is_blue(SidebandBranch branch) {
    return branch == SidebandBranch::BlueMinus || branch == SidebandBranch::BluePlus;
}

LatticeSign lattice_sign(SidebandBranch branch) {
    return (branch == SidebandBranch::RedPlus || branch == SidebandBranch::BluePlus) ? LatticeSign::Plus
                                                                                      : LatticeSign::Minus;
}

double effective_lamb_dicke(const PhysicalConfig& cfg, LatticeSign sign) {
    return lamb_dicke(cfg) * cfg.stark_amplitude / (2.0 * sideband_denominator(cfg, sign));
}

EffectiveParams effective_params(const PhysicalConfig& cfg) {
    EffectiveParams p{};
    p.eta_eff_minus = effective_lamb_dicke(cfg, LatticeSign::Minus);
    p.eta_eff_plus = effective_lamb_dicke(cfg, LatticeSign::Plus);
    if (cfg.running_freq == 0.0) throw ResonanceError("omega_r = 0: carrier-sideband Rabi frequency diverges");
    p.omega_c1 = cfg.stark_amplitude * cfg.microwave_rabi / (2.0 * cfg.running_freq);
    p.red_minus_coupling = -sideband_coupling(cfg, LatticeSign::Minus);
    p.red_plus_coupling = -sideband_coupling(cfg, LatticeSign::Plus);
    p.blue_minus_coupling = sideband_coupling(cfg, LatticeSign::Minus);
    p.blue_plus_coupling = sideband_coupling(cfg, LatticeSign::Plus);
    return p;
}

double branch_detuning(const PhysicalConfig& cfg, SidebandBranch branch) {
    switch (branch) {
        case SidebandBranch::CarrierC1: return cfg.running_freq;
        case SidebandBranch::RedMinus: return -(cfg.omega_z - cfg.running_freq);
        case SidebandBranch::RedPlus: return -(cfg.omega_z + cfg.running_freq);
        case SidebandBranch::BlueMinus: return cfg.omega_z - cfg.running_freq;
        case SidebandBranch::BluePlus: return cfg.omega_z + cfg.running_freq;
    }
    return 0.0;
}

OperatorMatrix carrier_c1_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims) {
    if (cfg.running_freq == 0.0) throw ResonanceError("omega_r = 0: carrier-sideband Hamiltonian is singular");
    const auto spin = spin_operators();
    const cplx i(0.0, 1.0);
    const cplx scale = i * cfg.stark_amplitude * cfg.microwave_rabi / (4.0 * cfg.running_freq);
    const Matrix s = scale * (spin.sigma_plus.matrix() - spin.sigma_minus.matrix());
    return embed(s, identity_fock(dims.fock_levels()), dims, true);
}

OperatorMatrix red_sideband_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, LatticeSign sign) {
    const double g = -sideband_coupling(cfg, sign);
    const auto spin = spin_operators();
    const auto l = ladder_operators(dims.fock_levels());
    const Matrix h = g * (embed(spin.sigma_plus.matrix(), l.a.matrix(), dims).matrix() +
                          embed(spin.sigma_minus.matrix(), l.a_dagger.matrix(), dims).matrix());
    return OperatorMatrix::hamiltonian(h);
}

OperatorMatrix blue_sideband_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, LatticeSign sign) {
    const double g = sideband_coupling(cfg, sign);
    const auto spin = spin_operators();
    const auto l = ladder_operators(dims.fock_levels());
    const Matrix h = g * (embed(spin.sigma_minus.matrix(), l.a.matrix(), dims).matrix() +
                          embed(spin.sigma_plus.matrix(), l.a_dagger.matrix(), dims).matrix());
    return OperatorMatrix::hamiltonian(h);
}

OperatorMatrix branch_hamiltonian(const PhysicalConfig& cfg, const HilbertDims& dims, SidebandBranch branch) {
    if (branch == SidebandBranch::CarrierC1) return carrier_c1_hamiltonian(cfg, dims);
    if (is_red(branch)) return red_sideband_hamiltonian(cfg, dims, lattice_sign(branch));
    return blue_sideband_hamiltonian(cfg, dims, lattice_sign(branch));
}

double carrier_light_shift(const PhysicalConfig& cfg, double detuning) {
    // The spin modulation -(d0/2) sin(wr t) sigma_z splits the microwave
    // carrier into Bessel tones J_k(beta) at k * wr, beta = d0 / wr.
    const double omega2 = cfg.microwave_rabi * cfg.microwave_rabi;
    if (cfg.running_freq == 0.0 || cfg.stark_amplitude == 0.0) {
        return std::abs(detuning) < kResonanceGuardBand ? 0.0 : omega2 / (2.0 * detuning);
    }
    const double beta = std::abs(cfg.stark_amplitude / cfg.running_freq);
    const int kmax = static_cast<int>(std::ceil(beta)) + 24;
    double shift = 0.0;
    for (int k = -kmax; k <= kmax; ++k) {
        const double gap = detuning - k * cfg.running_freq;
        if (std::abs(gap) < kResonanceGuardBand) continue;  // the driven tone itself
        const double j = std::cyl_bessel_j(static_cast<double>(std::abs(k)), beta);
        shift += j * j * omega2 / (2.0 * gap);
    }
    return shift;
}

double resonant_detuning(const PhysicalConfig& cfg, SidebandBranch branch) {
    const double bare = branch_detuning(cfg, branch);
    return bare - carrier_light_shift(cfg, bare);
}

double predicted_rabi(const PhysicalConfig& cfg, SidebandBranch branch) {
    if (branch == SidebandBranch::CarrierC1) {
        if (cfg.running_freq == 0.0) throw ResonanceError("omega_r = 0: carrier-sideband Rabi frequency diverges");
        return std::abs(cfg.stark_amplitude * cfg.microwave_rabi / (2.0 * cfg.running_freq));
    }
    return std::abs(effective_lamb_dicke(cfg, lattice_sign(branch))) * cfg.microwave_rabi;
}

std::vector<RabiPrediction> predicted_rabi_curve(const PhysicalConfig& cfg, std::span<const double> running_freqs,
                                                 SidebandBranch branch) {
    std::vector<RabiPrediction> curve;
    curve.reserve(running_freqs.size());
    for (double wr : running_freqs) {
        PhysicalConfig point = cfg;
        point.running_freq = wr;
        RabiPrediction p{wr, std::nullopt, {}};
        try {
            p.rabi = predicted_rabi(point, branch);
        } catch (const ResonanceError& e) {
            p.error = e.what();
        }
        curve.push_back(std::move(p));
    }
    return curve;
}

}  // namespace ionlattice
