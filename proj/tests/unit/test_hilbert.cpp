#include "ionlattice/errors.hpp"
#include "ionlattice/hilbert.hpp"

#include <doctest.h>

#include <random>

using namespace ionlattice;

namespace {

Matrix random_matrix(int n, std::mt19937& rng) {
    std::normal_distribution<double> d;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(d(rng), d(rng));
    return m;
}

}  // namespace

TEST_CASE("dims and index convention") {
    HilbertDims d(5);
    CHECK(d.total_dim() == 10);
    CHECK(d.index(0, 3) == 3);
    CHECK(d.index(1, 0) == 5);
    CHECK_THROWS_AS(HilbertDims(1), DimensionError);
    CHECK_THROWS_AS(d.index(2, 0), DimensionError);
    CHECK_THROWS_AS(d.index(0, 5), DimensionError);
}

TEST_CASE("ladder operators") {
    SUBCASE("N=2") {
        auto l = ladder_operators(2);
        Matrix expect(2, 2);
        expect << 0, 1, 0, 0;
        CHECK((l.a.matrix() - expect).norm() == 0.0);
    }
    SUBCASE("number operator N=3") {
        auto l = ladder_operators(3);
        Matrix n = l.a_dagger.matrix() * l.a.matrix();
        for (int k = 0; k < 3; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
    }
    SUBCASE("commutator N=4 with truncation edge") {
        auto l = ladder_operators(4);
        Matrix c = l.a.matrix() * l.a_dagger.matrix() - l.a_dagger.matrix() * l.a.matrix();
        for (int k = 0; k < 3; ++k) CHECK(std::abs(c(k, k) - 1.0) < 1e-15);
        CHECK(std::abs(c(3, 3) - cplx(1.0 - 4.0)) < 1e-14);
        Matrix off = c;
        off.diagonal().setZero();
        CHECK(off.norm() == 0.0);
    }
    SUBCASE("a acts as sqrt(n)|n-1> and a_dagger is the exact adjoint") {
        for (int n : {2, 7, 30}) {
            auto l = ladder_operators(n);
            CHECK((l.a_dagger.matrix() - l.a.matrix().adjoint()).norm() == 0.0);
            for (int k = 1; k < n; ++k) CHECK(l.a.matrix()(k - 1, k).real() == doctest::Approx(std::sqrt(k)));
            CHECK(l.a_dagger.matrix().col(n - 1).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(ladder_operators(1), DimensionError);
}

TEST_CASE("spin operators") {
    auto s = spin_operators();
    Eigen::Vector2cd zero(1, 0);
    CHECK(((s.sigma_z.matrix() * zero) + zero).norm() == 0.0);
    Matrix id = Matrix::Identity(2, 2);
    const Matrix& p = s.sigma_plus.matrix();
    const Matrix& m = s.sigma_minus.matrix();
    CHECK((p * m + m * p - id).norm() < 1e-15);
    CHECK(((p + m) * (p + m) - id).norm() < 1e-15);
    CHECK(std::abs(p(1, 0) - 1.0) == 0.0);  // |0> -> |1>
    CHECK((m - p.adjoint()).norm() == 0.0);
}

TEST_CASE("embed follows the spin-major ordering") {
    auto s = spin_operators();
    SUBCASE("sigma_z (x) I") {
        auto e = embed(s.sigma_z.matrix(), identity_fock(2), HilbertDims(2));
        Eigen::VectorXcd d(4);
        d << -1, -1, 1, 1;
        CHECK((e.matrix().diagonal() - d).norm() == 0.0);
    }
    SUBCASE("I (x) n") {
        auto e = embed(identity_spin(), number_operator(3), HilbertDims(3));
        Eigen::VectorXcd d(6);
        d << 0, 1, 2, 0, 1, 2;
        CHECK((e.matrix().diagonal() - d).norm() == 0.0);
    }
    SUBCASE("sigma_plus (x) a annihilates spin-up states") {
        const int n = 6;
        HilbertDims dims(n);
        auto e = embed(s.sigma_plus.matrix(), ladder_operators(n).a.matrix(), dims);
        for (int k = 0; k < n; ++k) {
            Vector v = Vector::Zero(dims.total_dim());
            v(dims.index(1, k)) = 1.0;
            CHECK((e.matrix() * v).norm() == 0.0);
        }
    }
    SUBCASE("factorization and linearity") {
        std::mt19937 rng(3);
        const int n = 5;
        HilbertDims dims(n);
        Matrix a = random_matrix(2, rng), a2 = random_matrix(2, rng), b = random_matrix(n, rng);
        Matrix lhs = embed(a, identity_fock(n), dims).matrix() * embed(identity_spin(), b, dims).matrix();
        CHECK((lhs - embed(a, b, dims).matrix()).cwiseAbs().maxCoeff() < 1e-12);
        Matrix lin = embed(2.0 * a + a2, b, dims).matrix() - 2.0 * embed(a, b, dims).matrix() - embed(a2, b, dims).matrix();
        CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(embed(identity_fock(3), identity_fock(3), HilbertDims(3)), DimensionError);
}

TEST_CASE("OperatorMatrix hermiticity tag") {
    Matrix m(2, 2);
    m << 1, cplx(0, 1), cplx(0, -1), 2;
    CHECK_NOTHROW(OperatorMatrix::hamiltonian(m));
    m(0, 1) += 1e-9;
    CHECK_THROWS(OperatorMatrix::hamiltonian(m));
    CHECK_THROWS_AS(OperatorMatrix(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("thermal distribution") {
    SUBCASE("ground state") {
        auto t = thermal_distribution(0.0, 10);
        CHECK(t.probabilities[0] == 1.0);
        for (int n = 1; n < 10; ++n) CHECK(t.probabilities[n] == 0.0);
    }
    SUBCASE("nbar = 1") {
        auto t = thermal_distribution(1.0, 200);
        CHECK(t.probabilities[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(t.probabilities[1] == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("nbar = 18, N = 160: mean by direct summation") {
        auto t = thermal_distribution(18.0, 160);
        double mean = 0.0, sum = 0.0;
        for (std::size_t n = 0; n < t.probabilities.size(); ++n) {
            CHECK(t.probabilities[n] >= 0.0);
            mean += n * t.probabilities[n];
            sum += t.probabilities[n];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        // renormalized truncated geometric: r/(1-r) - N r^N / (1 - r^N)
        const double r = 18.0 / 19.0, rn = std::pow(r, 160);
        CHECK(mean == doctest::Approx(r / (1 - r) - 160 * rn / (1 - rn)).epsilon(1e-12));
        CHECK(std::abs(mean - 18.0) / 18.0 < 2e-3);
        CHECK(t.mean() == doctest::Approx(mean).epsilon(1e-12));
        // untruncated tail (18/19)^160
        CHECK(t.tail_mass == doctest::Approx(std::pow(18.0 / 19.0, 160)).epsilon(1e-9));
    }
    SUBCASE("truncation warning") {
        CHECK(thermal_distribution(18.0, 30).truncation_warning);
        CHECK_FALSE(thermal_distribution(0.5, 60).truncation_warning);
    }
    CHECK_THROWS_AS(thermal_distribution(-0.1, 10), DomainError);
}

// Truncating at N = 160 leaves (18/19)^160 ~ 1.8e-4 of the mass outside, so
// the renormalized mean sits 1.6e-3 below 18. Kept as a known failure.
TEST_CASE("nbar = 18, N = 160 mean within 1e-3 relative" * doctest::should_fail()) {
    CHECK(std::abs(thermal_distribution(18.0, 160).mean() - 18.0) / 18.0 < 1e-3);
}

TEST_CASE("joint states") {
    HilbertDims dims(4);
    SUBCASE("pure normalization") {
        Vector v = Vector::Zero(8);
        v(0) = 1.0;
        CHECK_NOTHROW(JointState::pure(dims, v));
        v(0) = 1.01;
        CHECK_THROWS(JointState::pure(dims, v));
    }
    SUBCASE("density invariants") {
        Matrix rho = Matrix::Zero(8, 8);
        rho(0, 0) = 0.5;
        rho(4, 4) = 0.5;
        CHECK_NOTHROW(JointState::density(dims, rho));
        rho(0, 0) = 0.6;
        CHECK_THROWS(JointState::density(dims, rho));  // trace
        rho(0, 0) = 1.5;
        rho(4, 4) = -0.5;
        CHECK_THROWS(JointState::density(dims, rho));  // negative eigenvalue
    }
    SUBCASE("thermal density: trace 1 and purity <= 1") {
        HilbertDims d(40);
        auto st = JointState::product_diagonal(d, 0, thermal_distribution(2.0, 40).probabilities);
        CHECK(std::abs(st.density_matrix().trace() - 1.0) < 1e-12);
        CHECK(st.purity() <= 1.0);
        CHECK(st.purity() < 0.5);
    }
}

TEST_CASE("expectation values") {
    SUBCASE("spin-up projector on |1,0>") {
        HilbertDims d(3);
        Matrix proj = Matrix::Zero(2, 2);
        proj(1, 1) = 1.0;
        auto op = embed(proj, identity_fock(3), d, true);
        CHECK(expectation(JointState::basis(d, 1, 0), op).real() == doctest::Approx(1.0));
    }
    SUBCASE("thermal nbar = 1: <a^dagger a> = 1") {
        const int n = 120;
        HilbertDims d(n);
        auto st = JointState::product_diagonal(d, 0, thermal_distribution(1.0, n).probabilities);
        auto op = embed(identity_spin(), number_operator(n), d, true);
        CHECK(expectation(st, op).real() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("|0,2> number") {
        HilbertDims d(5);
        auto op = embed(identity_spin(), number_operator(5), d, true);
        auto v = expectation(JointState::basis(d, 0, 2), op);
        CHECK(v.real() == doctest::Approx(2.0));
        CHECK(v.imag() == 0.0);
    }
    SUBCASE("dimension mismatch") {
        auto op = embed(identity_spin(), number_operator(5), HilbertDims(5), true);
        CHECK_THROWS_AS(expectation(JointState::basis(HilbertDims(4), 0, 0), op), DimensionError);
    }
}
