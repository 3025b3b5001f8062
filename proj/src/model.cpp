#include "ionlattice/model.hpp"

#include "ionlattice/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ionlattice {

namespace {

Eigen::Matrix2cd spin_matrix(const OperatorMatrix& op) { return op.matrix(); }

// Relative size below which diagonals of sin/cos(eta (a + a^dagger)) are dropped.
constexpr double kExactBandDrop = 1e-14;

void add_first_order(SpinMotionOperator& h, const PhysicalConfig& cfg, double eta) {
    const int n = h.dims().fock_levels();
    const auto spin = spin_operators();
    const Eigen::Matrix2cd sz = spin_matrix(spin.sigma_z);
    const double wz = cfg.omega_z;
    const double wr = cfg.running_freq;
    const double d0 = cfg.stark_amplitude;
    const cplx i(0.0, 1.0);

    // (d0 eta / 4) sz a (e^{-i(wz+wr)t} + e^{-i(wz-wr)t}) + h.c.
    const double motional = d0 * eta / 4.0;
    h.add_term(sz, BandedFock::annihilation(n), {{motional, wz + wr}, {motional, wz - wr}});
    h.add_term(sz, BandedFock::creation(n), {{motional, -(wz + wr)}, {motional, -(wz - wr)}});
    // -(i d0 / 4) sz e^{-i wr t} + h.c.  ==  -(d0/2) sin(wr t) sz
    h.add_term(sz, BandedFock::identity(n), {{-i * d0 / 4.0, wr}, {i * d0 / 4.0, -wr}});
}

void add_second_order(SpinMotionOperator& h, const PhysicalConfig& cfg, double eta) {
    // (d0/4) sz X(t)^2 sin(wr t), X(t) = eta (a e^{-i wz t} + a^dagger e^{i wz t})
    const int n = h.dims().fock_levels();
    const Eigen::Matrix2cd sz = spin_matrix(spin_operators().sigma_z);
    const double wz = cfg.omega_z;
    const double wr = cfg.running_freq;
    const double k = cfg.stark_amplitude * eta * eta / 4.0;
    const cplx i(0.0, 1.0);
    // sin(wr t) = (-i/2) e^{-i(-wr)t} + (i/2) e^{-i wr t}
    const cplx lo = -i * k / 2.0;
    const cplx hi = i * k / 2.0;

    BandedFock a2(n);
    BandedFock ad2(n);
    Vector v2 = Vector::Zero(n);
    Vector vd2 = Vector::Zero(n);
    for (int r = 0; r + 2 < n; ++r) v2(r) = std::sqrt(static_cast<double>((r + 1) * (r + 2)));
    for (int r = 2; r < n; ++r) vd2(r) = std::sqrt(static_cast<double>(r * (r - 1)));
    a2.add_diagonal(2, v2);
    ad2.add_diagonal(-2, vd2);

    // a a^dagger + a^dagger a on the truncated space (top level: a a^dagger -> 0)
    const Matrix ladder_sum = [&] {
        const auto l = ladder_operators(n);
        return Matrix(l.a.matrix() * l.a_dagger.matrix() + l.a_dagger.matrix() * l.a.matrix());
    }();

    h.add_term(sz, std::move(a2), {{lo, 2.0 * wz - wr}, {hi, 2.0 * wz + wr}});
    h.add_term(sz, std::move(ad2), {{lo, -2.0 * wz - wr}, {hi, -2.0 * wz + wr}});
    h.add_term(sz, BandedFock::from_dense(ladder_sum), {{lo, -wr}, {hi, wr}});
}

void add_exact(SpinMotionOperator& h, const PhysicalConfig& cfg, double eta) {
    // (d0/2) sz [sin X(t) cos(wr t) - cos X(t) sin(wr t)], entries of f(X)
    // on diagonal k pick up exp(-i k wz t) in the interaction picture.
    const int n = h.dims().fock_levels();
    const Eigen::Matrix2cd sz = spin_matrix(spin_operators().sigma_z);
    const auto l = ladder_operators(n);
    const Eigen::MatrixXd x = eta * (l.a.matrix() + l.a_dagger.matrix()).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x);
    const Eigen::MatrixXd& v = eig.eigenvectors();
    const Eigen::ArrayXd lambda = eig.eigenvalues().array();
    const Matrix sin_x = (v * lambda.sin().matrix().asDiagonal() * v.transpose()).cast<cplx>();
    const Matrix cos_x = (v * lambda.cos().matrix().asDiagonal() * v.transpose()).cast<cplx>();

    const double wz = cfg.omega_z;
    const double wr = cfg.running_freq;
    const double q = cfg.stark_amplitude / 4.0;
    const cplx i(0.0, 1.0);

    const BandedFock sin_bands = BandedFock::from_dense(sin_x, kExactBandDrop);
    const BandedFock cos_bands = BandedFock::from_dense(cos_x, kExactBandDrop);
    for (const auto& d : sin_bands.diagonals()) {
        BandedFock band(n);
        band.add_diagonal(d.offset, d.values);
        const double base = d.offset * wz;
        h.add_term(sz, std::move(band), {{q, base + wr}, {q, base - wr}});
    }
    for (const auto& d : cos_bands.diagonals()) {
        BandedFock band(n);
        band.add_diagonal(d.offset, d.values);
        const double base = d.offset * wz;
        h.add_term(sz, std::move(band), {{-i * q, base + wr}, {i * q, base - wr}});
    }
}

}  // namespace

std::string to_string(ExpansionOrder order) {
    switch (order) {
        case ExpansionOrder::FirstOrder: return "first";
        case ExpansionOrder::SecondOrder: return "second";
        case ExpansionOrder::Exact: return "exact";
    }
    return "first";
}

ExpansionOrder parse_expansion_order(const std::string& text) {
    if (text == "first") return ExpansionOrder::FirstOrder;
    if (text == "second") return ExpansionOrder::SecondOrder;
    if (text == "exact") return ExpansionOrder::Exact;
    throw ConfigurationError("unknown expansion order '" + text + "' (expected first, second or exact)");
}

double lamb_dicke(const PhysicalConfig& cfg) {
    require_physical(cfg);
    const double z0 = std::sqrt(units::kHbar / (2.0 * cfg.ion_mass * cfg.omega_z));
    return cfg.delta_k() * z0;
}

double stark_profile(double z, double t, const PhysicalConfig& cfg) {
    return cfg.stark_amplitude * std::sin(cfg.delta_k() * z - cfg.running_freq * t);
}

SpinMotionOperator interaction_operator(const PhysicalConfig& cfg, const HilbertDims& dims, ExpansionOrder order,
                                        int max_occupied_phonon) {
    const double eta = lamb_dicke(cfg);
    SpinMotionOperator h(dims);
    const int n = dims.fock_levels();

    if (order == ExpansionOrder::Exact) {
        if (max_occupied_phonon >= 0 && n < 1.5 * max_occupied_phonon) {
            std::ostringstream msg;
            msg << "exact Stark expansion needs N >= 1.5 x largest occupied phonon number (" << max_occupied_phonon
                << "), got N = " << n;
            throw ConfigurationError(msg.str());
        }
        add_exact(h, cfg, eta);
    } else {
        add_first_order(h, cfg, eta);
        if (order == ExpansionOrder::SecondOrder) add_second_order(h, cfg, eta);
    }

    // (Omega/2)(sigma_+ e^{-i delta t} + sigma_- e^{i delta t})
    const auto spin = spin_operators();
    const double half_rabi = cfg.microwave_rabi / 2.0;
    const double det = cfg.microwave_detuning;
    h.add_term(spin.sigma_plus.matrix(), BandedFock::identity(n), {{half_rabi, det}});
    h.add_term(spin.sigma_minus.matrix(), BandedFock::identity(n), {{half_rabi, -det}});
    return h;
}

OperatorMatrix interaction_hamiltonian(double t, const PhysicalConfig& cfg, const HilbertDims& dims,
                                       ExpansionOrder order) {
    return interaction_operator(cfg, dims, order).at(t);
}

std::vector<ConfigIssue> validate_config(const PhysicalConfig& cfg) {
    using Severity = ConfigIssue::Severity;
    std::vector<ConfigIssue> issues;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            issues.push_back({Severity::Error, "nonphysical", std::string(name) + " must be finite and > 0"});
        }
    };
    auto nonnegative = [&](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            issues.push_back({Severity::Error, "nonphysical", std::string(name) + " must be finite and >= 0"});
        }
    };
    positive(cfg.ion_mass, "ion_mass");
    positive(cfg.lattice_wavelength, "lattice_wavelength");
    positive(cfg.omega_x, "omega_x");
    positive(cfg.omega_y, "omega_y");
    positive(cfg.omega_z, "omega_z");
    nonnegative(cfg.lattice_geometry_factor, "lattice_geometry_factor");
    nonnegative(cfg.running_freq, "running_freq");
    nonnegative(cfg.microwave_rabi, "microwave_rabi");
    if (!std::isfinite(cfg.stark_amplitude)) {
        issues.push_back({Severity::Error, "nonphysical", "stark_amplitude must be finite"});
    }
    if (!std::isfinite(cfg.microwave_detuning)) {
        issues.push_back({Severity::Error, "nonphysical", "microwave_detuning must be finite"});
    }
    if (!(cfg.coherence_time >= 0.0)) {
        issues.push_back({Severity::Error, "nonphysical", "coherence_time must be >= 0 (0 disables dephasing)"});
    }
    if (!issues.empty()) return issues;

    const double eta = cfg.delta_k() * std::sqrt(units::kHbar / (2.0 * cfg.ion_mass * cfg.omega_z));
    if (eta >= kLambDickeLimit) {
        std::ostringstream msg;
        msg << "Lamb-Dicke parameter " << eta << " >= " << kLambDickeLimit
            << "; first-order expansion in z is unreliable";
        issues.push_back({Severity::Warning, "lamb_dicke_regime", msg.str()});
    }
    const double ratio = cfg.running_freq > 0.0 ? std::abs(cfg.stark_amplitude / cfg.running_freq)
                                                : (cfg.stark_amplitude == 0.0 ? 0.0 : INFINITY);
    if (ratio >= kEffectiveRegimeLimit) {
        std::ostringstream msg;
        msg << "|stark_amplitude / running_freq| = " << ratio << " >= " << kEffectiveRegimeLimit
            << "; effective Hamiltonians neglect higher orders in this ratio (full integration unaffected)";
        issues.push_back({Severity::Warning, "effective_regime", msg.str()});
    }
    if (cfg.running_freq == cfg.omega_z) {
        issues.push_back({Severity::EffectiveModelError, "resonance_singularity",
                          "running_freq equals omega_z: omega_z - omega_r denominator vanishes in the effective model"});
    }
    return issues;
}

void require_physical(const PhysicalConfig& cfg) {
    std::string errors;
    for (const auto& issue : validate_config(cfg)) {
        if (issue.severity != ConfigIssue::Severity::Error) continue;
        if (!errors.empty()) errors += "; ";
        errors += issue.message;
    }
    if (!errors.empty()) throw ConfigurationError("invalid physical configuration: " + errors);
}

}  // namespace ionlattice
