#pragma once

// Truncated joint Hilbert space of a two-level spin and one motional mode.
//
// Basis index convention (used everywhere in the library):
//     i = s * N + n,   s in {0, 1},  n in {0, ..., N-1}
// with |0> the lower hyperfine state (sigma_z = -1) and N the Fock truncation.

#include <Eigen/Dense>

#include <complex>
#include <variant>
#include <vector>

namespace ionlattice {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class HilbertDims {
  public:
    explicit HilbertDims(int fock_levels);

    int fock_levels() const { return fock_levels_; }
    int total_dim() const { return 2 * fock_levels_; }
    int index(int spin, int phonons) const;

    bool operator==(const HilbertDims&) const = default;

  private:
    int fock_levels_;
};

// Dense square operator. Operators tagged Hermitian are checked on
// construction (entrywise, 1e-12 absolute).
class OperatorMatrix {
  public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(Matrix entries, bool hermitian = false);

    static OperatorMatrix hamiltonian(Matrix entries) { return OperatorMatrix(std::move(entries), true); }

    const Matrix& matrix() const { return entries_; }
    int dim() const { return static_cast<int>(entries_.rows()); }
    bool hermitian() const { return hermitian_; }

  private:
    Matrix entries_;
    bool hermitian_ = false;
};

inline constexpr double kHermitianTolerance = 1e-12;

double max_hermitian_residual(const Matrix& m);

class JointState {
  public:
    enum class Kind { Pure, Density };

    static JointState pure(const HilbertDims& dims, Vector amplitudes);
    static JointState density(const HilbertDims& dims, Matrix rho);
    // |s, n>
    static JointState basis(const HilbertDims& dims, int spin, int phonons);
    // |spin><spin| (x) sum_n p_n |n><n|
    static JointState product_diagonal(const HilbertDims& dims, int spin, const std::vector<double>& phonon_probs);

    Kind kind() const { return std::holds_alternative<Vector>(data_) ? Kind::Pure : Kind::Density; }
    bool is_pure() const { return kind() == Kind::Pure; }
    const HilbertDims& dims() const { return dims_; }

    const Vector& amplitudes() const;
    const Matrix& density_matrix() const;
    Matrix to_density() const;

    double spin_up_population() const;
    // P(s, n) for all basis states, in index order.
    std::vector<double> populations() const;
    double purity() const;

  private:
    JointState(const HilbertDims& dims, std::variant<Vector, Matrix> data) : dims_(dims), data_(std::move(data)) {}

    HilbertDims dims_;
    std::variant<Vector, Matrix> data_;
};

struct LadderOperators {
    OperatorMatrix a;
    OperatorMatrix a_dagger;
};

struct SpinOperators {
    OperatorMatrix sigma_z;
    OperatorMatrix sigma_plus;
    OperatorMatrix sigma_minus;
};

LadderOperators ladder_operators(int fock_levels);
SpinOperators spin_operators();

Matrix identity_spin();
Matrix identity_fock(int fock_levels);
Matrix number_operator(int fock_levels);

// op_spin (x) op_fock under the spin-major ordering.
OperatorMatrix embed(const Matrix& op_spin, const Matrix& op_fock, const HilbertDims& dims, bool hermitian = false);

struct ThermalDistribution {
    std::vector<double> probabilities;
    // Mass of the untruncated geometric distribution beyond n = N-1.
    double tail_mass = 0.0;
    bool truncation_warning = false;

    double mean() const;
};

inline constexpr double kThermalTailWarning = 1e-6;

ThermalDistribution thermal_distribution(double nbar, int fock_levels);

// <psi|op|psi> or Tr(rho op). For Hermitian-tagged operators the imaginary
// residue is checked (< 1e-9) and dropped.
cplx expectation(const JointState& state, const OperatorMatrix& op);

}  // namespace ionlattice
