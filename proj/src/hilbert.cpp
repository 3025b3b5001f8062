#include "ionlattice/hilbert.hpp"

#include "ionlattice/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <string>

namespace ionlattice {

namespace {

constexpr double kPureNormTolerance = 1e-9;
constexpr double kDensityHermitianTolerance = 1e-10;
constexpr double kDensityTraceTolerance = 1e-9;
constexpr double kDensityEigenTolerance = 1e-9;

}  // namespace

HilbertDims::HilbertDims(int fock_levels) : fock_levels_(fock_levels) {
    if (fock_levels < 2) {
        throw DimensionError("Fock truncation must be at least 2 levels, got " + std::to_string(fock_levels));
    }
}

int HilbertDims::index(int spin, int phonons) const {
    if (spin < 0 || spin > 1 || phonons < 0 || phonons >= fock_levels_) {
        throw DimensionError("basis label (" + std::to_string(spin) + ", " + std::to_string(phonons) +
                             ") outside the truncated space");
    }
    return spin * fock_levels_ + phonons;
}

double max_hermitian_residual(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

OperatorMatrix::OperatorMatrix(Matrix entries, bool hermitian) : entries_(std::move(entries)), hermitian_(hermitian) {
    if (entries_.rows() != entries_.cols()) {
        throw DimensionError("operator matrix must be square");
    }
    if (hermitian_ && max_hermitian_residual(entries_) > kHermitianTolerance) {
        throw DomainError("operator tagged Hermitian fails the 1e-12 Hermiticity check");
    }
}

JointState JointState::pure(const HilbertDims& dims, Vector amplitudes) {
    if (amplitudes.size() != dims.total_dim()) {
        throw DimensionError("state vector length does not match 2*N");
    }
    if (std::abs(amplitudes.norm() - 1.0) > kPureNormTolerance) {
        throw DomainError("pure state is not normalized (|norm - 1| > 1e-9)");
    }
    return JointState(dims, std::move(amplitudes));
}

JointState JointState::density(const HilbertDims& dims, Matrix rho) {
    if (rho.rows() != dims.total_dim() || rho.cols() != dims.total_dim()) {
        throw DimensionError("density matrix shape does not match 2N x 2N");
    }
    if (max_hermitian_residual(rho) > kDensityHermitianTolerance) {
        throw DomainError("density matrix is not Hermitian within 1e-10");
    }
    if (std::abs(rho.trace() - cplx(1.0)) > kDensityTraceTolerance) {
        throw DomainError("density matrix trace differs from 1 by more than 1e-9");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kDensityEigenTolerance) {
        throw DomainError("density matrix has an eigenvalue below -1e-9");
    }
    return JointState(dims, std::move(rho));
}

JointState JointState::basis(const HilbertDims& dims, int spin, int phonons) {
    Vector psi = Vector::Zero(dims.total_dim());
    psi(dims.index(spin, phonons)) = 1.0;
    return JointState(dims, std::move(psi));
}

JointState JointState::product_diagonal(const HilbertDims& dims, int spin, const std::vector<double>& phonon_probs) {
    if (static_cast<int>(phonon_probs.size()) != dims.fock_levels()) {
        throw DimensionError("phonon distribution length does not match N");
    }
    Matrix rho = Matrix::Zero(dims.total_dim(), dims.total_dim());
    for (int n = 0; n < dims.fock_levels(); ++n) {
        const int i = dims.index(spin, n);
        rho(i, i) = phonon_probs[static_cast<std::size_t>(n)];
    }
    return density(dims, std::move(rho));
}

const Vector& JointState::amplitudes() const {
    if (!is_pure()) throw std::logic_error("amplitudes() called on a density-matrix state");
    return std::get<Vector>(data_);
}

const Matrix& JointState::density_matrix() const {
    if (is_pure()) throw std::logic_error("density_matrix() called on a pure state");
    return std::get<Matrix>(data_);
}

Matrix JointState::to_density() const {
    if (is_pure()) {
        const auto& psi = std::get<Vector>(data_);
        return psi * psi.adjoint();
    }
    return std::get<Matrix>(data_);
}

std::vector<double> JointState::populations() const {
    std::vector<double> p(static_cast<std::size_t>(dims_.total_dim()));
    if (is_pure()) {
        const auto& psi = std::get<Vector>(data_);
        for (int i = 0; i < psi.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(psi(i));
    } else {
        const auto& rho = std::get<Matrix>(data_);
        for (int i = 0; i < rho.rows(); ++i) p[static_cast<std::size_t>(i)] = rho(i, i).real();
    }
    return p;
}

double JointState::spin_up_population() const {
    const auto p = populations();
    double up = 0.0;
    for (int n = 0; n < dims_.fock_levels(); ++n) up += p[static_cast<std::size_t>(dims_.index(1, n))];
    return up;
}

double JointState::purity() const {
    if (is_pure()) return 1.0;
    const auto& rho = std::get<Matrix>(data_);
    return (rho * rho).trace().real();
}

LadderOperators ladder_operators(int fock_levels) {
    if (fock_levels < 2) {
        throw DimensionError("ladder operators need at least 2 Fock levels");
    }
    Matrix a = Matrix::Zero(fock_levels, fock_levels);
    for (int n = 1; n < fock_levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    Matrix a_dagger = a.adjoint();
    return {OperatorMatrix(std::move(a)), OperatorMatrix(std::move(a_dagger))};
}

SpinOperators spin_operators() {
    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    Matrix sp = Matrix::Zero(2, 2);
    sp(1, 0) = 1.0;  // |1><0|
    Matrix sm = sp.adjoint();
    return {OperatorMatrix(std::move(sz), true), OperatorMatrix(std::move(sp)), OperatorMatrix(std::move(sm))};
}

Matrix identity_spin() { return Matrix::Identity(2, 2); }

Matrix identity_fock(int fock_levels) { return Matrix::Identity(fock_levels, fock_levels); }

Matrix number_operator(int fock_levels) {
    Matrix n = Matrix::Zero(fock_levels, fock_levels);
    for (int k = 0; k < fock_levels; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

OperatorMatrix embed(const Matrix& op_spin, const Matrix& op_fock, const HilbertDims& dims, bool hermitian) {
    if (op_spin.rows() != 2 || op_spin.cols() != 2) {
        throw DimensionError("spin factor must be 2x2");
    }
    if (op_fock.rows() != dims.fock_levels() || op_fock.cols() != dims.fock_levels()) {
        throw DimensionError("Fock factor must be N x N with N = " + std::to_string(dims.fock_levels()));
    }
    Matrix full = Eigen::kroneckerProduct(op_spin, op_fock).eval();
    return OperatorMatrix(std::move(full), hermitian);
}

double ThermalDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probabilities.size(); ++n) m += static_cast<double>(n) * probabilities[n];
    return m;
}

ThermalDistribution thermal_distribution(double nbar, int fock_levels) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw DomainError("mean phonon number must be finite and >= 0");
    }
    if (fock_levels < 1) {
        throw DimensionError("thermal distribution needs at least one Fock level");
    }
    ThermalDistribution out;
    out.probabilities.assign(static_cast<std::size_t>(fock_levels), 0.0);
    if (nbar == 0.0) {
        out.probabilities[0] = 1.0;
        return out;
    }
    // p_n = (1 - r) r^n with r = nbar / (nbar + 1)
    const double r = nbar / (nbar + 1.0);
    double term = 1.0 / (nbar + 1.0);
    double total = 0.0;
    for (auto& p : out.probabilities) {
        p = term;
        total += term;
        term *= r;
    }
    out.tail_mass = std::pow(r, fock_levels);
    out.truncation_warning = out.tail_mass > kThermalTailWarning;
    for (auto& p : out.probabilities) p /= total;
    return out;
}

cplx expectation(const JointState& state, const OperatorMatrix& op) {
    if (op.dim() != state.dims().total_dim()) {
        throw DimensionError("operator and state dimensions differ");
    }
    cplx value;
    if (state.is_pure()) {
        const auto& psi = state.amplitudes();
        value = psi.dot(op.matrix() * psi);
    } else {
        value = (state.density_matrix() * op.matrix()).trace();
    }
    if (op.hermitian()) {
        if (std::abs(value.imag()) > 1e-9) {
            throw DomainError("Hermitian expectation value has an imaginary residue above 1e-9");
        }
        return {value.real(), 0.0};
    }
    return value;
}

}  // namespace ionlattice
