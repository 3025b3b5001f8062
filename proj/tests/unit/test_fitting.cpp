#include "ionlattice/fitting.hpp"
#include "ionlattice/units.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ionlattice;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// Brute-force thermal oracle, independent of the library's tail handling.
double thermal_oracle(double t, double rabi, double nbar, bool blue) {
    double sum = 0.0;
    const double r = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    for (int n = 0; n < 5000; ++n, p *= r) {
        const double s = std::sin(0.5 * rabi * std::sqrt(blue ? n + 1.0 : double(n)) * t);
        sum += p * s * s;
    }
    return sum;
}

void add_noise(std::vector<double>& y, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sigma);
    for (auto& v : y) v += d(rng);
}

}  // namespace

TEST_CASE("thermal Rabi forward model") {
    const double rabi = units::angular_khz(1.96);
    for (double nbar : {0.0, 0.3, 18.0})
        for (double t : {0.0, 37e-6, 255e-6, 900e-6}) {
            CHECK(thermal_rabi_model(t, rabi, nbar, SidebandKind::Blue) ==
                  doctest::Approx(thermal_oracle(t, rabi, nbar, true)).epsilon(1e-10));
            CHECK(thermal_rabi_model(t, rabi, nbar, SidebandKind::Red) ==
                  doctest::Approx(thermal_oracle(t, rabi, nbar, false)).epsilon(1e-10));
        }
    CHECK(thermal_rabi_model(100e-6, rabi, 0.0, SidebandKind::Red) == 0.0);
}

TEST_CASE("thermal Rabi fit round trips") {
    const double rabi = units::angular_khz(1.96);
    const auto t = linspace(0.0, 600e-6, 120);

    SUBCASE("nbar = 18 with 5% Gaussian noise: both within 10%") {
        // Below ~2 periods of the n = 0 oscillation, 5% noise leaves the
        // (rabi, nbar) pair weakly identified; 1.5 ms covers ~3.
        const auto tl = linspace(0.0, 1.5e-3, 200);
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            std::vector<double> y;
            for (double ti : tl) y.push_back(thermal_rabi_model(ti, rabi, 18.0, SidebandKind::Blue));
            add_noise(y, 0.05, seed);
            const auto fit = fit_thermal_rabi(tl, y);
            CAPTURE(seed);
            CHECK(fit.converged);
            CHECK(fit.value("rabi") == doctest::Approx(rabi).epsilon(0.10));
            CHECK(fit.value("nbar") == doctest::Approx(18.0).epsilon(0.10));
            CHECK(std::isfinite(fit.uncertainty("rabi")));
        }
    }
    SUBCASE("nbar = 0: single sinusoid, rabi within 1%") {
        std::vector<double> y;
        for (double ti : t) y.push_back(thermal_rabi_model(ti, rabi, 0.0, SidebandKind::Blue));
        add_noise(y, 0.02, 7);
        const auto fit = fit_thermal_rabi(t, y);
        CHECK(fit.value("rabi") == doctest::Approx(rabi).epsilon(0.01));
        CHECK(fit.value("nbar") < 0.05);
    }
    SUBCASE("noiseless forward model: 1e-4 relative") {
        for (double nbar : {0.5, 4.0, 18.0}) {
            std::vector<double> y;
            for (double ti : t) y.push_back(thermal_rabi_model(ti, rabi, nbar, SidebandKind::Blue));
            const auto fit = fit_thermal_rabi(t, y);
            CAPTURE(nbar);
            CHECK(fit.converged);
            CHECK(fit.value("rabi") == doctest::Approx(rabi).epsilon(1e-4));
            CHECK(fit.value("nbar") == doctest::Approx(nbar).epsilon(1e-4));
        }
    }
    SUBCASE("dephasing-aware model") {
        const double t2 = 0.47e-3;
        std::vector<double> y;
        for (double ti : t)
            y.push_back(0.5 + (thermal_rabi_model(ti, rabi, 18.0, SidebandKind::Blue) - 0.5) * std::exp(-ti / t2));
        const auto fit = fit_thermal_rabi(t, y, std::nullopt, SidebandKind::Blue, t2);
        CHECK(fit.converged);
        CHECK(fit.value("rabi") == doctest::Approx(rabi).epsilon(1e-4));
        CHECK(fit.value("nbar") == doctest::Approx(18.0).epsilon(1e-4));
    }
    SUBCASE("red-sideband kind") {
        std::vector<double> y;
        for (double ti : t) y.push_back(thermal_rabi_model(ti, rabi, 5.0, SidebandKind::Red));
        const auto fit = fit_thermal_rabi(t, y, ThermalRabiGuess{1.2 * rabi, 3.0}, SidebandKind::Red);
        CHECK(fit.value("rabi") == doctest::Approx(rabi).epsilon(1e-4));
        CHECK(fit.value("nbar") == doctest::Approx(5.0).epsilon(1e-4));
    }
    SUBCASE("degenerate inputs are flagged, not thrown") {
        std::vector<double> zeros(t.size(), 0.0);
        const auto fit = fit_thermal_rabi(t, zeros);
        CHECK_FALSE(fit.converged);
        CHECK(std::isinf(fit.uncertainty("rabi")));
        std::vector<double> few{0.0, 0.1, 0.2};
        std::vector<double> ft{0.0, 1e-6, 2e-6};
        CHECK_FALSE(fit_thermal_rabi(ft, few).converged);
    }
}

TEST_CASE("damped sinusoid fit round trips") {
    const double omega = units::angular_khz(22.0);
    SUBCASE("3% noise: omega within 2%, tau within 15%") {
        const auto t = linspace(0.0, 1e-3, 400);
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            std::vector<double> y;
            for (double ti : t) y.push_back(damped_sinusoid_model(ti, 0.5, 0.47e-3, omega, std::numbers::pi, 0.5));
            add_noise(y, 0.03, seed);
            const auto fit = fit_damped_sinusoid(t, y);
            CAPTURE(seed);
            CHECK(fit.converged);
            CHECK(fit.value("omega") == doctest::Approx(omega).epsilon(0.02));
            CHECK(fit.value("tau") == doctest::Approx(0.47e-3).epsilon(0.15));
        }
    }
    SUBCASE("noiseless undamped: tau >= 10x span, omega to 1e-4") {
        const auto t = linspace(0.0, 150e-6, 120);
        std::vector<double> y;
        for (double ti : t) y.push_back(0.5 - 0.5 * std::cos(omega * ti));
        const auto fit = fit_damped_sinusoid(t, y);
        CHECK(fit.converged);
        CHECK(fit.value("omega") == doctest::Approx(omega).epsilon(1e-4));
        CHECK(fit.value("tau") >= 10.0 * t.back());
        CHECK(fit.value("amplitude") == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(fit.value("offset") == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("constant trace is flagged") {
        const auto t = linspace(0.0, 1e-4, 50);
        std::vector<double> y(t.size(), 0.3);
        const auto fit = fit_damped_sinusoid(t, y);
        CHECK_FALSE(fit.converged);
        CHECK(std::isnan(fit.value("omega")));
    }
}

TEST_CASE("unknown parameter name") {
    FitResult r;
    CHECK_THROWS(r.parameter("nope"));
}
