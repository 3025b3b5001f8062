#pragma once

// Least-squares fits of Rabi-oscillation traces.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ionlattice {

struct FitParameter {
    std::string name;
    double value;
    double uncertainty;  // 1 sigma from the residual-scaled covariance; inf if unidentifiable
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double residual_norm = 0.0;
    // True only when the scaled gradient J^T r at the solution is below
    // threshold (or the residual vanishes) and the input was not degenerate.
    bool converged = false;
    int iterations = 0;
    std::string message;

    const FitParameter& parameter(const std::string& name) const;
    double value(const std::string& name) const { return parameter(name).value; }
    double uncertainty(const std::string& name) const { return parameter(name).uncertainty; }
};

enum class SidebandKind { Blue, Red };

// sum_n p_n(nbar) sin^2(rabi sqrt(n + 1) t / 2)  (blue; sqrt(n) for red),
// p_n thermal and summed until the remaining tail is below 1e-12.
double thermal_rabi_model(double t, double rabi, double nbar, SidebandKind kind);

struct ThermalRabiGuess {
    double rabi;  // rad/s
    double nbar;
};

inline constexpr double kMaxFitNbar = 200.0;

// Parameters "rabi" (rad/s) and "nbar" (bounded to [0, kMaxFitNbar]). Without
// a guess, a coarse grid search over (rabi, nbar) seeds the optimizer. With
// coherence_time > 0 the model relaxes toward 1/2 as exp(-t / coherence_time),
// matching the dephasing envelope of thermal_average.
FitResult fit_thermal_rabi(std::span<const double> times, std::span<const double> populations,
                           std::optional<ThermalRabiGuess> guess = std::nullopt,
                           SidebandKind kind = SidebandKind::Blue, double coherence_time = 0.0);

// A exp(-t/tau) cos(omega t + phase) + offset
double damped_sinusoid_model(double t, double amplitude, double tau, double omega, double phase, double offset);

// Parameters "amplitude", "tau" (s; inf when no decay is resolved), "omega"
// (rad/s), "phase", "offset".
FitResult fit_damped_sinusoid(std::span<const double> times, std::span<const double> populations);

inline constexpr int kMinFitPoints = 10;

}  // namespace ionlattice
