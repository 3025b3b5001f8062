#pragma once

// Time evolution under interaction-picture Hamiltonians (rad/s):
//   pure states:      i d psi/dt = H(t) psi
//   density matrices: d rho/dt = -i [H(t), rho] + gamma (Z rho Z - rho),
// with Z = sigma_z (x) 1 and gamma = 1 / (2 T2), so spin coherences decay as
// exp(-t / T2). Populations are reported as P(spin = 1).

#include "ionlattice/hilbert.hpp"
#include "ionlattice/spin_motion_operator.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ionlattice {

enum class Integrator {
    MagnusCF4,    // fixed-step commutator-free 4th-order Magnus, unitary
    RungeKutta4,  // fixed-step classical 4th-order Runge-Kutta
    Adaptive,     // CF4 with step-doubling error control against `tolerance`
};

struct EvolutionSpec {
    SpinMotionOperator hamiltonian;
    double duration = 0.0;  // s
    // Sample times in [0, duration], increasing. Empty: 200 uniform samples
    // including both endpoints.
    std::vector<double> sample_times;
    double coherence_time = 0.0;  // T2 in s; 0 or infinite = no dephasing
    double tolerance = 1e-8;      // local error per step (Adaptive)
    Integrator method = Integrator::MagnusCF4;
    // Fixed step is at most 1/steps_per_period of the shortest period in H
    // (tone frequencies and the norm bound both count as frequencies).
    int steps_per_period = 20;
    double max_step = 0.0;  // extra cap in s when > 0

    explicit EvolutionSpec(SpinMotionOperator h) : hamiltonian(std::move(h)) {}
};

inline constexpr int kDefaultSamples = 200;
// |norm - 1| budget per simulated millisecond.
inline constexpr double kNormBudgetPerMs = 1e-8;

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<double> populations;  // P(|1>) at each sample
    std::optional<JointState> final_state;
    std::size_t steps = 0;
    double max_norm_error = 0.0;  // |norm - 1| (pure) or |trace - 1| (density), worst sample
    std::vector<std::string> warnings;
};

// Default step length for a spec (before snapping to sample intervals).
double fixed_step(const EvolutionSpec& spec);

TrajectoryResult evolve_pure(const EvolutionSpec& spec, const JointState& psi0);
// Same step selection as evolve_pure; Adaptive runs as fixed-step CF4.
TrajectoryResult evolve_density(const EvolutionSpec& spec, const JointState& rho0);

struct ThermalAverageOptions {
    // Each initial |spin, n> is evolved on Fock levels [n - w, n + w] clipped
    // to the truncation; negative = whole space.
    int window_half_width = 6;
    // Fock components with thermal weight at or below this are skipped.
    double weight_cutoff = 0.0;
    // Reference path: one density-matrix evolution of the thermal state.
    bool reference_path = false;
    // Assemble the mixed final state (fast path without dephasing only).
    bool keep_final_state = true;
    int jobs = 1;
};

// Thermal mixture sum_n p_n |spin0, n><spin0, n| evolved under spec. With
// dephasing, the fast path multiplies the oscillation about 1/2 by exp(-t/T2)
// (no final state is returned); the reference path integrates the master
// equation directly.
TrajectoryResult thermal_average(const EvolutionSpec& spec, double nbar, int spin0 = 0,
                                 const ThermalAverageOptions& options = {});

// pi / coupling, where coupling is the Rabi frequency in rad/s.
double pi_time(double coupling);

std::vector<double> uniform_samples(double duration, int count);

}  // namespace ionlattice
