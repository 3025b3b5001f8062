#pragma once

// Time-dependent operators of the form
//
//     H(t) = sum_k c_k(t) * S_k (x) F_k,     c_k(t) = sum_j A_kj exp(-i w_kj t)
//
// with S_k a 2x2 spin matrix and F_k a banded Fock operator. Every
// interaction-picture Hamiltonian in this library has that shape, which lets
// the integrators apply H(t) in O(bandwidth * N) without forming 2N x 2N
// matrices, and lets thermal averaging restrict the Fock space to a window
// around each initial phonon number.

#include "ionlattice/hilbert.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ionlattice {

// Square Fock operator stored by diagonals: entry (r, r + offset) = values[r].
class BandedFock {
  public:
    struct Diagonal {
        int offset;
        Vector values;  // length dim; entries whose column falls outside are zero
    };

    explicit BandedFock(int dim);

    static BandedFock identity(int dim);
    static BandedFock annihilation(int dim);
    static BandedFock creation(int dim);
    // Keeps diagonals whose largest entry exceeds drop_tolerance * max|entry|.
    static BandedFock from_dense(const Matrix& m, double drop_tolerance = 0.0);

    int dim() const { return dim_; }
    const std::vector<Diagonal>& diagonals() const { return diagonals_; }
    bool empty() const { return diagonals_.empty(); }
    int bandwidth() const;

    void add_diagonal(int offset, Vector values);
    Matrix to_dense() const;
    // Sub-block on rows/columns [first, first + size).
    BandedFock window(int first, int size) const;
    // Upper bound on the operator 2-norm (sum over diagonals of max |entry|).
    double norm_bound() const;

  private:
    int dim_;
    std::vector<Diagonal> diagonals_;
};

// amplitude * exp(-i frequency t), frequency in rad/s
struct Tone {
    cplx amplitude;
    double frequency;
};

struct SpinMotionTerm {
    Eigen::Matrix2cd spin;
    BandedFock fock;
    std::vector<Tone> tones;

    cplx coefficient(double t) const;
};

class SpinMotionOperator {
  public:
    explicit SpinMotionOperator(const HilbertDims& dims) : dims_(dims) {}

    // Splits a dense 2N x 2N operator into its four spin blocks; static in time.
    static SpinMotionOperator from_static(const OperatorMatrix& op, const HilbertDims& dims);

    void add_term(const Eigen::Matrix2cd& spin, BandedFock fock, std::vector<Tone> tones);

    const HilbertDims& dims() const { return dims_; }
    const std::vector<SpinMotionTerm>& terms() const { return terms_; }

    std::vector<cplx> coefficients(double t) const;
    // Writes sum_k weights_k * c_k into out (used for linear combinations of
    // H at several times, e.g. Magnus-type integrators).
    void combined_coefficients(std::span<const double> times, std::span<const double> weights,
                               std::vector<cplx>& out) const;

    // out = H in, where H is assembled from the given per-term coefficients.
    // in and out are 2N x B (state vectors as columns).
    void apply(std::span<const cplx> coefficients, const Matrix& in, Matrix& out) const;
    void apply(double t, const Matrix& in, Matrix& out) const;

    Matrix dense(double t) const;
    OperatorMatrix at(double t) const;

    // Largest |frequency| over tones with nonzero amplitude.
    double max_frequency() const;
    // Bound on ||H(t)|| valid for every t.
    double norm_bound() const;

    // Restriction to Fock levels [first, first + size); spin factor unchanged.
    SpinMotionOperator window(int first, int size) const;

  private:
    HilbertDims dims_;
    std::vector<SpinMotionTerm> terms_;
};

}  // namespace ionlattice
