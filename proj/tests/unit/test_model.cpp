#include "ionlattice/errors.hpp"
#include "ionlattice/model.hpp"

#include <doctest.h>

#include <random>

using namespace ionlattice;

namespace {

PhysicalConfig paper() { return PhysicalConfig{}; }

bool has_issue(const std::vector<ConfigIssue>& issues, const std::string& code) {
    for (const auto& i : issues)
        if (i.code == code) return true;
    return false;
}

// Largest singular value of the low-n block (n < cut in both spin sectors).
double low_block_norm(const Matrix& m, int n_levels, int cut) {
    std::vector<int> idx;
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < cut; ++n) idx.push_back(s * n_levels + n);
    Matrix b(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) b(i, j) = m(idx[i], idx[j]);
    return Eigen::JacobiSVD<Matrix>(b).singularValues()(0);
}

}  // namespace

TEST_CASE("Lamb-Dicke parameter") {
    // independent hand calculation
    const double hbar = 1.054571817e-34;
    const double m = 171 * 1.66053906660e-27;
    const double wz = 2 * M_PI * 0.79e6;
    const double dk = std::sqrt(2.0) * 2 * M_PI / 377.2e-9;
    const double expected = dk * std::sqrt(hbar / (2 * m * wz));
    CHECK(lamb_dicke(paper()) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(lamb_dicke(paper()) == doctest::Approx(0.144).epsilon(0.005));

    auto heavy = paper();
    heavy.ion_mass *= 2.0;
    CHECK(lamb_dicke(heavy) == doctest::Approx(lamb_dicke(paper()) / std::sqrt(2.0)).epsilon(1e-13));

    auto flat = paper();
    flat.lattice_geometry_factor = 0.0;
    CHECK(lamb_dicke(flat) == 0.0);
}

TEST_CASE("Stark profile") {
    auto c = paper();
    CHECK(stark_profile(0.0, 0.0, c) == 0.0);
    CHECK(stark_profile(0.0, (M_PI / 2) / c.running_freq, c) == doctest::Approx(-c.stark_amplitude));
    CHECK(stark_profile((M_PI / 2) / c.delta_k(), 0.0, c) == doctest::Approx(c.stark_amplitude));
}

TEST_CASE("interaction Hamiltonian special cases") {
    const int n = 8;
    HilbertDims dims(n);
    auto spin = spin_operators();

    SUBCASE("no Stark shift: bare microwave drive") {
        auto c = paper();
        c.stark_amplitude = 0.0;
        c.microwave_detuning = units::angular_khz(123.0);
        for (double t : {0.0, 1.3e-6, 47e-6}) {
            const cplx ph = std::exp(cplx(0, -c.microwave_detuning * t));
            Matrix spin_part = 0.5 * c.microwave_rabi * (ph * spin.sigma_plus.matrix() + std::conj(ph) * spin.sigma_minus.matrix());
            Matrix expect = embed(spin_part, identity_fock(n), dims).matrix();
            for (auto order : {ExpansionOrder::FirstOrder, ExpansionOrder::SecondOrder, ExpansionOrder::Exact}) {
                CHECK((interaction_hamiltonian(t, c, dims, order).matrix() - expect).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }

    SUBCASE("no drive, eta -> 0: -(d0/2) sin(wr t) sigma_z") {
        auto c = paper();
        c.microwave_rabi = 0.0;
        c.lattice_geometry_factor = 0.0;
        for (double t : {0.2e-6, 0.9e-6, 3.1e-6}) {
            Matrix expect = embed(-0.5 * c.stark_amplitude * std::sin(c.running_freq * t) * spin.sigma_z.matrix(),
                                  identity_fock(n), dims)
                                .matrix();
            CHECK((interaction_hamiltonian(t, c, dims, ExpansionOrder::FirstOrder).matrix() - expect)
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("Hermiticity at random times, all orders") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1e-3);
    HilbertDims dims(20);
    auto c = paper();
    c.microwave_detuning = units::angular_khz(490.0);
    for (auto order : {ExpansionOrder::FirstOrder, ExpansionOrder::SecondOrder, ExpansionOrder::Exact}) {
        const auto op = interaction_operator(c, dims, order);
        for (int k = 0; k < 10; ++k) {
            // relative to the entry scale (~1e6 rad/s): absolute 1e-12 * |H|
            const Matrix h = op.dense(u(rng));
            CHECK(max_hermitian_residual(h) <= 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()));
            const double t = u(rng);
            CHECK_NOTHROW(op.at(t));
            CHECK(max_hermitian_residual(op.at(t).matrix()) <= 1e-12);
            CHECK((op.at(t).matrix() - op.dense(t)).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("expansion orders converge as eta shrinks") {
    const int n = 40;
    HilbertDims dims(n);
    auto at_eta = [&](double eta, ExpansionOrder order, double t) {
        auto c = paper();
        c.lattice_geometry_factor *= eta / lamb_dicke(paper());
        return interaction_hamiltonian(t, c, dims, order).matrix();
    };
    for (double t : {0.37e-6, 2.9e-6}) {
        const double d1 = low_block_norm(at_eta(0.1, ExpansionOrder::Exact, t) - at_eta(0.1, ExpansionOrder::FirstOrder, t), n, 10);
        const double d2 = low_block_norm(at_eta(0.05, ExpansionOrder::Exact, t) - at_eta(0.05, ExpansionOrder::FirstOrder, t), n, 10);
        CHECK(d1 / d2 >= 3.5);
        const double s1 = low_block_norm(at_eta(0.1, ExpansionOrder::Exact, t) - at_eta(0.1, ExpansionOrder::SecondOrder, t), n, 10);
        const double s2 = low_block_norm(at_eta(0.05, ExpansionOrder::Exact, t) - at_eta(0.05, ExpansionOrder::SecondOrder, t), n, 10);
        CHECK(s1 / s2 >= 7.0);
        CHECK(s1 < d1);
    }
}

TEST_CASE("periodicity when all frequencies are multiples of omega_r") {
    auto c = paper();
    c.running_freq = units::angular_khz(100.0);
    c.omega_z = 8.0 * c.running_freq;
    c.microwave_detuning = 3.0 * c.running_freq;
    HilbertDims dims(10);
    const double period = units::kTwoPi / c.running_freq;
    for (auto order : {ExpansionOrder::FirstOrder, ExpansionOrder::SecondOrder, ExpansionOrder::Exact}) {
        const auto op = interaction_operator(c, dims, order);
        for (double t : {0.0, 1.7e-6, 4.4e-6}) {
            const Matrix a = op.dense(t);
            const Matrix b = op.dense(t + period);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8 * a.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("exact expansion truncation guard") {
    HilbertDims dims(30);
    CHECK_NOTHROW(interaction_operator(paper(), dims, ExpansionOrder::Exact, 20));
    CHECK_THROWS_AS(interaction_operator(paper(), dims, ExpansionOrder::Exact, 21), ConfigurationError);
}

TEST_CASE("config validation") {
    SUBCASE("paper defaults: effective-regime warning only") {
        auto issues = validate_config(paper());
        CHECK(has_issue(issues, "effective_regime"));
        for (const auto& i : issues) CHECK(i.severity == ConfigIssue::Severity::Warning);
        CHECK_NOTHROW(require_physical(paper()));
    }
    SUBCASE("resonance singularity") {
        auto c = paper();
        c.running_freq = c.omega_z;
        auto issues = validate_config(c);
        REQUIRE(has_issue(issues, "resonance_singularity"));
        for (const auto& i : issues)
            if (i.code == "resonance_singularity") CHECK(i.severity == ConfigIssue::Severity::EffectiveModelError);
    }
    SUBCASE("nominal small-eta config is clean") {
        auto c = paper();
        c.stark_amplitude = units::angular_khz(50.0);
        CHECK(validate_config(c).empty());
    }
    SUBCASE("Lamb-Dicke warning") {
        auto c = paper();
        c.lattice_geometry_factor = 5.0;
        CHECK(has_issue(validate_config(c), "lamb_dicke_regime"));
    }
    SUBCASE("nonphysical values are hard errors") {
        auto c = paper();
        c.ion_mass = -1.0;
        CHECK(has_issue(validate_config(c), "nonphysical"));
        CHECK_THROWS_AS(require_physical(c), ConfigurationError);
        c = paper();
        c.lattice_wavelength = 0.0;
        CHECK_THROWS_AS(require_physical(c), ConfigurationError);
        CHECK_THROWS_AS(lamb_dicke(c), ConfigurationError);
    }
}

TEST_CASE("expansion order names") {
    for (auto o : {ExpansionOrder::FirstOrder, ExpansionOrder::SecondOrder, ExpansionOrder::Exact})
        CHECK(parse_expansion_order(to_string(o)) == o);
    CHECK_THROWS_AS(parse_expansion_order("third"), ConfigurationError);
}
