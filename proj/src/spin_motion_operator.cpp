#include "ionlattice/spin_motion_operator.hpp"

#include "ionlattice/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace ionlattice {

namespace {

// Valid row range [lo, hi) of a diagonal with the given offset.
std::pair<int, int> row_range(int dim, int offset) {
    return {std::max(0, -offset), std::min(dim, dim - offset)};
}

}  // namespace

BandedFock::BandedFock(int dim) : dim_(dim) {
    if (dim < 1) throw DimensionError("banded operator dimension must be positive");
}

BandedFock BandedFock::identity(int dim) {
    BandedFock b(dim);
    b.add_diagonal(0, Vector::Ones(dim));
    return b;
}

BandedFock BandedFock::annihilation(int dim) {
    BandedFock b(dim);
    Vector v = Vector::Zero(dim);
    for (int r = 0; r + 1 < dim; ++r) v(r) = std::sqrt(static_cast<double>(r + 1));
    b.add_diagonal(1, std::move(v));
    return b;
}

BandedFock BandedFock::creation(int dim) {
    BandedFock b(dim);
    Vector v = Vector::Zero(dim);
    for (int r = 1; r < dim; ++r) v(r) = std::sqrt(static_cast<double>(r));
    b.add_diagonal(-1, std::move(v));
    return b;
}

BandedFock BandedFock::from_dense(const Matrix& m, double drop_tolerance) {
    if (m.rows() != m.cols()) throw DimensionError("banded conversion needs a square matrix");
    const int dim = static_cast<int>(m.rows());
    BandedFock b(dim);
    const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0) return b;
    for (int k = -(dim - 1); k <= dim - 1; ++k) {
        auto [lo, hi] = row_range(dim, k);
        Vector v = Vector::Zero(dim);
        double largest = 0.0;
        for (int r = lo; r < hi; ++r) {
            v(r) = m(r, r + k);
            largest = std::max(largest, std::abs(v(r)));
        }
        if (largest > 0.0 && largest > drop_tolerance * scale) b.add_diagonal(k, std::move(v));
    }
    return b;
}

int BandedFock::bandwidth() const {
    int w = 0;
    for (const auto& d : diagonals_) w = std::max(w, std::abs(d.offset));
    return w;
}

void BandedFock::add_diagonal(int offset, Vector values) {
    if (values.size() != dim_) throw DimensionError("diagonal length must equal the operator dimension");
    if (std::abs(offset) >= dim_) throw DimensionError("diagonal offset outside the matrix");
    auto [lo, hi] = row_range(dim_, offset);
    for (int r = 0; r < dim_; ++r) {
        if (r < lo || r >= hi) values(r) = 0.0;
    }
    for (auto& d : diagonals_) {
        if (d.offset == offset) {
            d.values += values;
            return;
        }
    }
    diagonals_.push_back({offset, std::move(values)});
}

Matrix BandedFock::to_dense() const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (const auto& d : diagonals_) {
        auto [lo, hi] = row_range(dim_, d.offset);
        for (int r = lo; r < hi; ++r) m(r, r + d.offset) += d.values(r);
    }
    return m;
}

BandedFock BandedFock::window(int first, int size) const {
    if (first < 0 || size < 1 || first + size > dim_) throw DimensionError("Fock window outside the operator");
    BandedFock b(size);
    for (const auto& d : diagonals_) {
        if (std::abs(d.offset) >= size) continue;
        auto [lo, hi] = row_range(size, d.offset);
        Vector v = Vector::Zero(size);
        for (int r = lo; r < hi; ++r) v(r) = d.values(first + r);
        b.add_diagonal(d.offset, std::move(v));
    }
    return b;
}

double BandedFock::norm_bound() const {
    double s = 0.0;
    for (const auto& d : diagonals_) s += d.values.cwiseAbs().maxCoeff();
    return s;
}

cplx SpinMotionTerm::coefficient(double t) const {
    cplx c = 0.0;
    for (const auto& tone : tones) {
        c += tone.frequency == 0.0 ? tone.amplitude : tone.amplitude * std::polar(1.0, -tone.frequency * t);
    }
    return c;
}

SpinMotionOperator SpinMotionOperator::from_static(const OperatorMatrix& op, const HilbertDims& dims) {
    if (op.dim() != dims.total_dim()) throw DimensionError("operator does not match 2N");
    const int n = dims.fock_levels();
    SpinMotionOperator out(dims);
    for (int sp = 0; sp < 2; ++sp) {
        for (int s = 0; s < 2; ++s) {
            BandedFock block = BandedFock::from_dense(op.matrix().block(sp * n, s * n, n, n));
            if (block.empty()) continue;
            Eigen::Matrix2cd unit = Eigen::Matrix2cd::Zero();
            unit(sp, s) = 1.0;
            out.add_term(unit, std::move(block), {Tone{1.0, 0.0}});
        }
    }
    return out;
}

void SpinMotionOperator::add_term(const Eigen::Matrix2cd& spin, BandedFock fock, std::vector<Tone> tones) {
    if (fock.dim() != dims_.fock_levels()) throw DimensionError("Fock factor dimension does not match N");
    terms_.push_back({spin, std::move(fock), std::move(tones)});
}

std::vector<cplx> SpinMotionOperator::coefficients(double t) const {
    std::vector<cplx> c(terms_.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) c[k] = terms_[k].coefficient(t);
    return c;
}

void SpinMotionOperator::combined_coefficients(std::span<const double> times, std::span<const double> weights,
                                               std::vector<cplx>& out) const {
    out.assign(terms_.size(), 0.0);
    for (std::size_t j = 0; j < times.size(); ++j) {
        for (std::size_t k = 0; k < terms_.size(); ++k) out[k] += weights[j] * terms_[k].coefficient(times[j]);
    }
}

void SpinMotionOperator::apply(std::span<const cplx> coefficients, const Matrix& in, Matrix& out) const {
    const int n = dims_.fock_levels();
    const int cols = static_cast<int>(in.cols());
    out.setZero(in.rows(), cols);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const auto& term = terms_[k];
        const cplx c = coefficients[k];
        if (c == cplx(0.0)) continue;
        for (int sp = 0; sp < 2; ++sp) {
            for (int s = 0; s < 2; ++s) {
                const cplx f = c * term.spin(sp, s);
                if (f == cplx(0.0)) continue;
                for (const auto& d : term.fock.diagonals()) {
                    auto [lo, hi] = row_range(n, d.offset);
                    const cplx* v = d.values.data();
                    for (int col = 0; col < cols; ++col) {
                        const cplx* src = in.col(col).data() + s * n + d.offset;
                        cplx* dst = out.col(col).data() + sp * n;
                        for (int r = lo; r < hi; ++r) dst[r] += f * v[r] * src[r];
                    }
                }
            }
        }
    }
}

void SpinMotionOperator::apply(double t, const Matrix& in, Matrix& out) const {
    const auto c = coefficients(t);
    apply(c, in, out);
}

Matrix SpinMotionOperator::dense(double t) const {
    Matrix h = Matrix::Zero(dims_.total_dim(), dims_.total_dim());
    for (const auto& term : terms_) {
        const cplx c = term.coefficient(t);
        if (c == cplx(0.0)) continue;
        h += c * Eigen::kroneckerProduct(Matrix(term.spin), term.fock.to_dense()).eval();
    }
    return h;
}

OperatorMatrix SpinMotionOperator::at(double t) const {
    // Terms pair up into Hermitian sums only up to rounding (~1e-10 on rad/s
    // entries); averaging with the adjoint makes the result exactly Hermitian.
    const Matrix h = dense(t);
    return OperatorMatrix::hamiltonian(0.5 * (h + h.adjoint()));
}

double SpinMotionOperator::max_frequency() const {
    double w = 0.0;
    for (const auto& term : terms_) {
        for (const auto& tone : term.tones) {
            if (tone.amplitude != cplx(0.0)) w = std::max(w, std::abs(tone.frequency));
        }
    }
    return w;
}

double SpinMotionOperator::norm_bound() const {
    double total = 0.0;
    for (const auto& term : terms_) {
        double amp = 0.0;
        for (const auto& tone : term.tones) amp += std::abs(tone.amplitude);
        const double spin_norm = std::max(term.spin.cwiseAbs().rowwise().sum().maxCoeff(),
                                          term.spin.cwiseAbs().colwise().sum().maxCoeff());
        total += amp * spin_norm * term.fock.norm_bound();
    }
    return total;
}

SpinMotionOperator SpinMotionOperator::window(int first, int size) const {
    SpinMotionOperator out{HilbertDims(size)};
    for (const auto& term : terms_) {
        BandedFock w = term.fock.window(first, size);
        if (w.empty()) continue;
        out.add_term(term.spin, std::move(w), term.tones);
    }
    return out;
}

}  // namespace ionlattice
