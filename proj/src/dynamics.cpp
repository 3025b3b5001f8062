#include "ionlattice/dynamics.hpp"

#include "ionlattice/errors.hpp"
#include "ionlattice/parallel.hpp"
#include "ionlattice/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ionlattice {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
// Gauss-Legendre nodes and commutator-free Magnus weights (order 4).
constexpr double kNode1 = 0.5 - kSqrt3 / 6.0;
constexpr double kNode2 = 0.5 + kSqrt3 / 6.0;
constexpr double kWeightSmall = (3.0 - 2.0 * kSqrt3) / 12.0;
constexpr double kWeightLarge = (3.0 + 2.0 * kSqrt3) / 12.0;

constexpr int kMaxTaylorTerms = 60;
constexpr double kTaylorTolerance = 1e-16;
constexpr double kNormFailureFactor = 10.0;
constexpr double kRoundoffFloor = 1e-11;
constexpr double kNegativeEigenLimit = -1e-6;
constexpr double kPopulationSlack = 1e-9;

bool has_dephasing(const EvolutionSpec& spec) {
    return spec.coherence_time > 0.0 && std::isfinite(spec.coherence_time);
}

double norm_failure_threshold(double t) {
    return std::max(kNormFailureFactor * kNormBudgetPerMs * (t / 1e-3), kRoundoffFloor);
}

std::vector<double> resolve_samples(const EvolutionSpec& spec) {
    if (!(spec.duration >= 0.0) || !std::isfinite(spec.duration)) {
        throw DomainError("evolution duration must be finite and >= 0");
    }
    if (!(spec.tolerance > 0.0)) throw DomainError("integration tolerance must be > 0");
    if (spec.steps_per_period < 1) throw DomainError("steps_per_period must be >= 1");
    if (spec.sample_times.empty()) return uniform_samples(spec.duration, kDefaultSamples);
    for (std::size_t i = 0; i < spec.sample_times.size(); ++i) {
        const double t = spec.sample_times[i];
        if (t < 0.0 || t > spec.duration * (1.0 + 1e-12) + 1e-18) {
            throw DomainError("sample time outside [0, duration]");
        }
        if (i > 0 && !(t > spec.sample_times[i - 1])) throw DomainError("sample times must be strictly increasing");
    }
    return spec.sample_times;
}

double spin_up(const Matrix& psi, int n) { return psi.col(0).tail(n).squaredNorm(); }

// Shared work buffers for one trajectory.
struct PureStepper {
    const SpinMotionOperator& h;
    Integrator method;
    std::vector<cplx> coeffs;
    Matrix term, tmp, k1, k2, k3, k4, stage;

    explicit PureStepper(const SpinMotionOperator& op, Integrator m) : h(op), method(m) {}

    // psi <- exp(-i dt H[coeffs]) psi by a Taylor series run to roundoff.
    void exp_apply(double dt, Matrix& psi) {
        term = psi;
        const double scale = psi.norm();
        for (int k = 1; k <= kMaxTaylorTerms; ++k) {
            h.apply(coeffs, term, tmp);
            term = tmp * cplx(0.0, -dt / k);
            psi += term;
            if (term.norm() <= kTaylorTolerance * scale) return;
        }
        throw IntegratorError("Taylor exponential did not converge; step too large for the Hamiltonian norm");
    }

    void magnus_step(Matrix& psi, double t, double dt) {
        const std::array<double, 2> times{t + kNode1 * dt, t + kNode2 * dt};
        const std::array<double, 2> first{kWeightLarge, kWeightSmall};
        const std::array<double, 2> second{kWeightSmall, kWeightLarge};
        h.combined_coefficients(times, first, coeffs);
        exp_apply(dt, psi);
        h.combined_coefficients(times, second, coeffs);
        exp_apply(dt, psi);
    }

    void rk4_step(Matrix& psi, double t, double dt) {
        const cplx mi(0.0, -1.0);
        coeffs = h.coefficients(t);
        h.apply(coeffs, psi, k1);
        k1 *= mi;
        coeffs = h.coefficients(t + 0.5 * dt);
        stage = psi + (0.5 * dt) * k1;
        h.apply(coeffs, stage, k2);
        k2 *= mi;
        stage = psi + (0.5 * dt) * k2;
        h.apply(coeffs, stage, k3);
        k3 *= mi;
        coeffs = h.coefficients(t + dt);
        stage = psi + dt * k3;
        h.apply(coeffs, stage, k4);
        k4 *= mi;
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    void step(Matrix& psi, double t, double dt) {
        if (method == Integrator::RungeKutta4) {
            rk4_step(psi, t, dt);
        } else {
            magnus_step(psi, t, dt);
        }
    }
};

// Advances psi from t0 to t1 with fixed steps no longer than dt.
std::size_t advance_fixed(PureStepper& stepper, Matrix& psi, double t0, double t1, double dt) {
    const double span = t1 - t0;
    if (span <= 0.0) return 0;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) stepper.step(psi, t0 + static_cast<double>(s) * h, h);
    return steps;
}

std::size_t advance_adaptive(PureStepper& stepper, Matrix& psi, double t0, double t1, double& h,
                             double tolerance) {
    std::size_t steps = 0;
    double t = t0;
    Matrix big, half;
    while (t < t1) {
        const double hs = std::min(h, t1 - t);
        big = psi;
        stepper.step(big, t, hs);
        half = psi;
        stepper.step(half, t, 0.5 * hs);
        stepper.step(half, t + 0.5 * hs, 0.5 * hs);
        const double err = (big - half).norm() / 15.0;
        const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(tolerance / err, 0.2), 0.2, 4.0);
        if (err <= tolerance) {
            psi = half;
            t = (hs == t1 - t) ? t1 : t + hs;
            ++steps;
            h = hs * factor;
        } else {
            h = hs * factor;
            if (h < 1e-18) throw IntegratorError("adaptive step size underflow");
        }
    }
    return steps;
}

void check_norm(double value, double t, const char* what) {
    const double err = std::abs(value - 1.0);
    if (err > norm_failure_threshold(t)) {
        std::ostringstream msg;
        msg << what << " drifted by " << err << " at t = " << t * 1e6 << " us (limit "
            << norm_failure_threshold(t) << "); reduce the step (steps_per_period / max_step)";
        throw IntegratorError(msg.str());
    }
}

void check_population(double p, double t) {
    if (p < -kPopulationSlack || p > 1.0 + kPopulationSlack) {
        std::ostringstream msg;
        msg << "population " << p << " left [0, 1] at t = " << t * 1e6 << " us";
        throw IntegratorError(msg.str());
    }
}

// Liouvillian action for Hermitian rho. RungeKutta4 steps the master
// equation directly; the Magnus methods apply the same commutator-free
// scheme as the pure engine to the superoperator, with the (constant)
// dephasing term split evenly between the two exponentials.
struct DensityStepper {
    const SpinMotionOperator& h;
    double gamma;  // dephasing rate gamma' = 1/(2 T2)
    Integrator method;
    std::vector<cplx> coeffs;
    Matrix hr, k1, k2, k3, k4, stage, term, tmp;

    DensityStepper(const SpinMotionOperator& op, double g, Integrator m) : h(op), gamma(g), method(m) {}

    // out = -i [H[coeffs], x] - dephasing_weight * 2 gamma * (spin off-diagonal blocks of x)
    void liouvillian(const Matrix& x, double dephasing_weight, Matrix& out) {
        h.apply(coeffs, x, hr);
        // x H = (H x)^dagger for Hermitian x
        out = cplx(0.0, -1.0) * (hr - hr.adjoint());
        if (gamma > 0.0 && dephasing_weight != 0.0) {
            const Eigen::Index n = x.rows() / 2;
            const double rate = 2.0 * gamma * dephasing_weight;
            out.topRightCorner(n, n) -= rate * x.topRightCorner(n, n);
            out.bottomLeftCorner(n, n) -= rate * x.bottomLeftCorner(n, n);
        }
    }

    void rhs(double t, const Matrix& rho, Matrix& out) {
        coeffs = h.coefficients(t);
        liouvillian(rho, 1.0, out);
    }

    void rk4_step(Matrix& rho, double t, double dt) {
        rhs(t, rho, k1);
        stage = rho + (0.5 * dt) * k1;
        rhs(t + 0.5 * dt, stage, k2);
        stage = rho + (0.5 * dt) * k2;
        rhs(t + 0.5 * dt, stage, k3);
        stage = rho + dt * k3;
        rhs(t + dt, stage, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // rho <- exp(dt L[coeffs]) rho, Taylor series run to roundoff.
    void exp_apply(double dt, double dephasing_weight, Matrix& rho) {
        term = rho;
        const double scale = rho.norm();
        for (int k = 1; k <= kMaxTaylorTerms; ++k) {
            liouvillian(term, dephasing_weight, tmp);
            term = tmp * (dt / k);
            rho += term;
            if (term.norm() <= kTaylorTolerance * scale) return;
        }
        throw IntegratorError("Taylor exponential did not converge; step too large for the Liouvillian norm");
    }

    void magnus_step(Matrix& rho, double t, double dt) {
        const std::array<double, 2> times{t + kNode1 * dt, t + kNode2 * dt};
        const std::array<double, 2> first{kWeightLarge, kWeightSmall};
        const std::array<double, 2> second{kWeightSmall, kWeightLarge};
        h.combined_coefficients(times, first, coeffs);
        exp_apply(dt, 0.5, rho);
        h.combined_coefficients(times, second, coeffs);
        exp_apply(dt, 0.5, rho);
    }

    void step(Matrix& rho, double t, double dt) {
        if (method == Integrator::RungeKutta4) {
            rk4_step(rho, t, dt);
        } else {
            magnus_step(rho, t, dt);
        }
    }
};

}  // namespace

std::vector<double> uniform_samples(double duration, int count) {
    if (count < 2) throw DomainError("need at least two samples");
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = duration * i / (count - 1);
    if (duration == 0.0) t.resize(1);
    return t;
}

double fixed_step(const EvolutionSpec& spec) {
    double rate = std::max(spec.hamiltonian.max_frequency(), spec.hamiltonian.norm_bound());
    if (has_dephasing(spec)) rate = std::max(rate, 1.0 / spec.coherence_time);
    double dt = rate > 0.0 ? units::kTwoPi / (rate * spec.steps_per_period) : spec.duration;
    if (spec.max_step > 0.0) dt = std::min(dt, spec.max_step);
    if (!(dt > 0.0)) dt = spec.duration > 0.0 ? spec.duration : 1.0;
    return dt;
}

TrajectoryResult evolve_pure(const EvolutionSpec& spec, const JointState& psi0) {
    if (!psi0.is_pure()) throw DomainError("evolve_pure needs a pure initial state");
    if (psi0.dims() != spec.hamiltonian.dims()) throw DimensionError("state and Hamiltonian dimensions differ");
    if (has_dephasing(spec)) {
        throw ConfigurationError("evolve_pure does not model dephasing; use evolve_density or thermal_average");
    }
    const auto samples = resolve_samples(spec);
    const int n = psi0.dims().fock_levels();
    const double dt = fixed_step(spec);

    PureStepper stepper(spec.hamiltonian, spec.method);
    Matrix psi = psi0.amplitudes();
    TrajectoryResult out;
    out.times = samples;
    out.populations.reserve(samples.size());

    double t = 0.0;
    double h_adaptive = dt;
    for (double ts : samples) {
        if (spec.method == Integrator::Adaptive) {
            out.steps += advance_adaptive(stepper, psi, t, ts, h_adaptive, spec.tolerance);
        } else {
            out.steps += advance_fixed(stepper, psi, t, ts, dt);
        }
        t = ts;
        const double norm = psi.col(0).norm();
        out.max_norm_error = std::max(out.max_norm_error, std::abs(norm - 1.0));
        check_norm(norm, t, "state norm");
        const double p1 = spin_up(psi, n);
        check_population(p1, t);
        out.populations.push_back(std::clamp(p1, 0.0, 1.0));
    }
    if (t < spec.duration) {
        out.steps += advance_fixed(stepper, psi, t, spec.duration, dt);
        check_norm(psi.col(0).norm(), spec.duration, "state norm");
    }
    Vector final_psi = psi.col(0);
    final_psi /= final_psi.norm();
    out.final_state = JointState::pure(psi0.dims(), std::move(final_psi));
    return out;
}

TrajectoryResult evolve_density(const EvolutionSpec& spec, const JointState& rho0) {
    if (rho0.dims() != spec.hamiltonian.dims()) throw DimensionError("state and Hamiltonian dimensions differ");
    const auto samples = resolve_samples(spec);
    const int n = rho0.dims().fock_levels();
    const double dt = fixed_step(spec);

    // Adaptive control is not implemented for density matrices; it falls back
    // to fixed CF4 steps.
    DensityStepper stepper(spec.hamiltonian, has_dephasing(spec) ? 1.0 / (2.0 * spec.coherence_time) : 0.0,
                           spec.method);
    Matrix rho = rho0.to_density();
    TrajectoryResult out;
    out.times = samples;
    out.populations.reserve(samples.size());

    auto advance = [&](double t0, double t1) {
        const double span = t1 - t0;
        if (span <= 0.0) return;
        const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
        const double h = span / static_cast<double>(steps);
        for (std::size_t s = 0; s < steps; ++s) stepper.step(rho, t0 + static_cast<double>(s) * h, h);
        out.steps += steps;
    };

    double t = 0.0;
    for (double ts : samples) {
        advance(t, ts);
        t = ts;
        const double trace = rho.trace().real();
        out.max_norm_error = std::max(out.max_norm_error, std::abs(trace - 1.0));
        check_norm(trace, t, "density-matrix trace");
        const double herm = max_hermitian_residual(rho);
        if (herm > norm_failure_threshold(t)) {
            throw IntegratorError("density matrix lost Hermiticity beyond the integration budget");
        }
        double p1 = 0.0;
        for (int k = 0; k < n; ++k) p1 += rho(n + k, n + k).real();
        check_population(p1, t);
        out.populations.push_back(std::clamp(p1, 0.0, 1.0));
    }
    advance(t, spec.duration);

    Matrix final_rho = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(final_rho, Eigen::EigenvaluesOnly);
    const double lowest = eig.eigenvalues().minCoeff();
    if (lowest < kNegativeEigenLimit) {
        std::ostringstream msg;
        msg << "density matrix developed eigenvalue " << lowest << " (< -1e-6)";
        throw IntegratorError(msg.str());
    }
    final_rho /= final_rho.trace();
    // Small negative eigenvalues inside the integration budget are tolerated by the
    // state container only down to -1e-9; clip them when they exceed that.
    if (lowest < -1e-9) {
        Eigen::SelfAdjointEigenSolver<Matrix> full(final_rho);
        Eigen::VectorXd lambda = full.eigenvalues().cwiseMax(0.0);
        lambda /= lambda.sum();
        final_rho = full.eigenvectors() * lambda.cast<cplx>().asDiagonal() * full.eigenvectors().adjoint();
        out.warnings.push_back("clipped negative density-matrix eigenvalues within the -1e-6 budget");
    }
    out.final_state = JointState::density(rho0.dims(), std::move(final_rho));
    return out;
}

TrajectoryResult thermal_average(const EvolutionSpec& spec, double nbar, int spin0,
                                 const ThermalAverageOptions& options) {
    const HilbertDims& dims = spec.hamiltonian.dims();
    if (spin0 != 0 && spin0 != 1) throw DomainError("initial spin must be 0 or 1");
    const auto thermal = thermal_distribution(nbar, dims.fock_levels());
    std::vector<std::string> warnings;
    if (thermal.truncation_warning) {
        std::ostringstream msg;
        msg << "thermal tail mass " << thermal.tail_mass << " beyond N = " << dims.fock_levels()
            << " exceeds 1e-6; distribution renormalized";
        warnings.push_back(msg.str());
    }

    if (options.reference_path) {
        auto out = evolve_density(spec, JointState::product_diagonal(dims, spin0, thermal.probabilities));
        out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
        return out;
    }

    const auto samples = resolve_samples(spec);
    const int n_levels = dims.fock_levels();
    std::vector<int> components;
    double included = 0.0;
    for (int n = 0; n < n_levels; ++n) {
        const double p = thermal.probabilities[static_cast<std::size_t>(n)];
        if (p > options.weight_cutoff) {
            components.push_back(n);
            included += p;
        }
    }

    struct Component {
        int first = 0;
        TrajectoryResult traj;
    };
    std::vector<Component> results(components.size());
    const int half = options.window_half_width < 0 ? n_levels : std::max(1, options.window_half_width);

    parallel_for(components.size(), options.jobs, [&](std::size_t idx) {
        const int n = components[idx];
        const int first = std::max(0, n - half);
        const int last = std::min(n_levels - 1, n + half);
        const int size = std::max(2, last - first + 1);
        const int lo = std::min(first, n_levels - size);
        EvolutionSpec sub(size == n_levels ? spec.hamiltonian : spec.hamiltonian.window(lo, size));
        sub.duration = spec.duration;
        sub.sample_times = samples;
        sub.coherence_time = 0.0;
        sub.tolerance = spec.tolerance;
        sub.method = spec.method;
        sub.steps_per_period = spec.steps_per_period;
        sub.max_step = spec.max_step;
        results[idx].first = lo;
        results[idx].traj = evolve_pure(sub, JointState::basis(sub.hamiltonian.dims(), spin0, n - lo));
    });

    TrajectoryResult out;
    out.times = samples;
    out.populations.assign(samples.size(), 0.0);
    out.warnings = std::move(warnings);
    for (std::size_t idx = 0; idx < components.size(); ++idx) {
        const double w = thermal.probabilities[static_cast<std::size_t>(components[idx])] / included;
        const auto& traj = results[idx].traj;
        for (std::size_t s = 0; s < samples.size(); ++s) out.populations[s] += w * traj.populations[s];
        out.steps += traj.steps;
        out.max_norm_error = std::max(out.max_norm_error, traj.max_norm_error);
    }

    if (has_dephasing(spec)) {
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const double envelope = std::exp(-samples[s] / spec.coherence_time);
            out.populations[s] = 0.5 + (out.populations[s] - 0.5) * envelope;
        }
        return out;
    }
    if (!options.keep_final_state) return out;

    Matrix rho = Matrix::Zero(dims.total_dim(), dims.total_dim());
    for (std::size_t idx = 0; idx < components.size(); ++idx) {
        const double w = thermal.probabilities[static_cast<std::size_t>(components[idx])] / included;
        const auto& psi = results[idx].traj.final_state->amplitudes();
        const int size = static_cast<int>(psi.size() / 2);
        const int lo = results[idx].first;
        // scatter the windowed vector into full-space indices
        Vector full = Vector::Zero(dims.total_dim());
        for (int s = 0; s < 2; ++s) full.segment(s * n_levels + lo, size) = psi.segment(s * size, size);
        rho.noalias() += w * full * full.adjoint();
    }
    rho = 0.5 * (rho + rho.adjoint());
    out.final_state = JointState::density(dims, std::move(rho));
    return out;
}

double pi_time(double coupling) {
    if (!(coupling > 0.0) || !std::isfinite(coupling)) throw DomainError("pi_time needs a coupling > 0");
    return std::numbers::pi / coupling;
}

}  // namespace ionlattice
