#include "ionlattice/experiments.hpp"

#include "ionlattice/errors.hpp"
#include "ionlattice/parallel.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace ionlattice {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Fock components below this weight are not propagated during cooling.
constexpr double kCoolingWeightFloor = 1e-14;
// Effective-model cooling accepts drives this close to a red resonance.
constexpr double kResonanceTolerance = units::angular_khz(1.0);

void add_unique(std::vector<std::string>& list, const std::string& s) {
    if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(s);
}

// Largest Fock level carrying non-negligible thermal weight (for the exact
// expansion's truncation check).
int occupied_limit(double nbar, int fock_levels) {
    if (nbar <= 0.0) return 0;
    const auto p = thermal_distribution(nbar, fock_levels).probabilities;
    double tail = 1.0;
    for (int n = 0; n < fock_levels; ++n) {
        tail -= p[static_cast<std::size_t>(n)];
        if (tail < 1e-6) return n;
    }
    return fock_levels - 1;
}

EvolutionSpec make_spec(SpinMotionOperator op, double duration, std::vector<double> samples, double t2,
                        const SimulationSettings& sim) {
    EvolutionSpec spec(std::move(op));
    spec.duration = duration;
    spec.sample_times = std::move(samples);
    spec.coherence_time = t2;
    spec.method = sim.method;
    spec.steps_per_period = sim.steps_per_period;
    return spec;
}

SpinMotionOperator full_operator(const PhysicalConfig& cfg, double detuning, double nbar, const SimulationSettings& sim) {
    PhysicalConfig drive = cfg;
    drive.microwave_detuning = detuning;
    const HilbertDims dims(sim.fock_levels);
    const int occupied = sim.order == ExpansionOrder::Exact ? occupied_limit(nbar, sim.fock_levels) : -1;
    return interaction_operator(drive, dims, sim.order, occupied);
}

// P(|1>) after `duration` for a two-level system starting in |0>, coupled by
// matrix element `coupling` (Rabi frequency 2 * coupling), detuned by `offset`,
// with pure dephasing of the coherence at rate 1/T2.
double two_level_excitation(double coupling, double offset, double duration, double t2) {
    using M2 = Eigen::Matrix2cd;
    using M4 = Eigen::Matrix4cd;
    M2 h;
    h << -0.5 * offset, coupling, coupling, 0.5 * offset;
    const M2 id = M2::Identity();
    // column-major vec: vec(H rho) = (I (x) H) vec rho, vec(rho H) = (H^T (x) I) vec rho
    M4 l = cplx(0.0, -1.0) * (M4(Eigen::kroneckerProduct(id, h)) - M4(Eigen::kroneckerProduct(h.transpose(), id)));
    if (t2 > 0.0 && std::isfinite(t2)) {
        l(1, 1) -= 1.0 / t2;
        l(2, 2) -= 1.0 / t2;
    }
    const M4 prop = (l * duration).exp();
    return std::clamp(prop(3, 0).real(), 0.0, 1.0);
}

double mean_phonons(std::span<const double> p) {
    double m = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
    return m;
}

int cooling_levels(double nbar0, const CoolingOptions& options, std::vector<std::string>& warnings) {
    if (options.fock_levels > 0) {
        const auto thermal = thermal_distribution(nbar0, options.fock_levels);
        if (thermal.tail_mass > kCoolingTruncationLimit) {
            std::ostringstream msg;
            msg << "nbar0 = " << nbar0 << " overflows N = " << options.fock_levels << " (thermal tail "
                << thermal.tail_mass << " > " << kCoolingTruncationLimit << ")";
            throw DomainError(msg.str());
        }
        if (thermal.truncation_warning) {
            std::ostringstream msg;
            msg << "thermal tail mass " << thermal.tail_mass << " beyond N = " << options.fock_levels;
            warnings.push_back(msg.str());
        }
        return options.fock_levels;
    }
    int n = std::max(2, options.sim.fock_levels);
    if (nbar0 > 0.0) {
        const double r = nbar0 / (nbar0 + 1.0);
        n = std::max(n, static_cast<int>(std::ceil(std::log(kThermalTailWarning) / std::log(r))));
    }
    return n;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Full ? "full" : "effective"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "full") return ModelKind::Full;
    if (text == "effective") return ModelKind::Effective;
    throw ConfigurationError("unknown model '" + text + "' (expected full or effective)");
}

void PulseSpec::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("pulse duration must be > 0");
    if (!std::isfinite(detuning)) throw DomainError("pulse detuning must be finite");
}

// ---------------------------------------------------------------- spectrum

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y, double min_prominence) {
    if (x.size() != y.size()) throw DimensionError("peak search: x and y differ in length");
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    std::size_t seg_begin = 0;
    while (seg_begin < n) {
        while (seg_begin < n && !std::isfinite(y[seg_begin])) ++seg_begin;
        std::size_t seg_end = seg_begin;
        while (seg_end < n && std::isfinite(y[seg_end])) ++seg_end;
        // interior maxima of [seg_begin, seg_end); plateaus allowed
        std::size_t i = seg_begin + 1;
        while (i + 1 < seg_end) {
            if (y[i] > y[i - 1]) {
                std::size_t j = i;
                while (j + 1 < seg_end && y[j + 1] == y[i]) ++j;
                if (j + 1 < seg_end && y[j + 1] < y[i]) {
                    const double h = y[i];
                    double left_min = h;
                    for (std::size_t k = i; k-- > seg_begin;) {
                        if (y[k] > h) break;
                        left_min = std::min(left_min, y[k]);
                    }
                    double right_min = h;
                    for (std::size_t k = j + 1; k < seg_end; ++k) {
                        if (y[k] > h) break;
                        right_min = std::min(right_min, y[k]);
                    }
                    const double prominence = h - std::max(left_min, right_min);
                    if (prominence >= min_prominence) peaks.push_back({i, x[i], h, prominence});
                }
                i = j + 1;
            } else {
                ++i;
            }
        }
        seg_begin = seg_end;
    }
    return peaks;
}

std::size_t SpectrumResult::failed_points() const {
    return static_cast<std::size_t>(std::count_if(errors.begin(), errors.end(), [](const auto& e) { return !e.empty(); }));
}

std::vector<double> linear_grid(double first, double last, std::size_t count) {
    if (count < 2) throw DomainError("a grid needs at least two points");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    g.back() = last;
    return g;
}

SpectrumResult sideband_spectrum(const PhysicalConfig& cfg, std::span<const double> grid, double pulse_duration,
                                 double nbar0, const SpectrumOptions& options) {
    require_physical(cfg);
    if (!(nbar0 >= 0.0) || !std::isfinite(nbar0)) throw DomainError("nbar0 must be finite and >= 0");
    if (!(pulse_duration > 0.0)) throw DomainError("pulse duration must be > 0");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw DomainError("detuning grid must be finite");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("detuning grid must be strictly increasing");
    }

    SpectrumResult out;
    out.detunings.assign(grid.begin(), grid.end());
    out.populations.assign(grid.size(), kNaN);
    out.errors.assign(grid.size(), {});
    out.pulse_duration = pulse_duration;
    out.nbar0 = nbar0;
    out.config = cfg;

    const bool outer = grid.size() >= static_cast<std::size_t>(std::max(1, options.sim.jobs));
    std::vector<std::vector<std::string>> point_warnings(grid.size());
    parallel_for(grid.size(), outer ? options.sim.jobs : 1, [&](std::size_t i) {
        try {
            auto spec = make_spec(full_operator(cfg, grid[i], nbar0, options.sim), pulse_duration, {pulse_duration},
                                  options.apply_dephasing ? cfg.coherence_time : 0.0, options.sim);
            ThermalAverageOptions ta;
            ta.window_half_width = options.sim.window_half_width;
            ta.keep_final_state = false;
            ta.jobs = outer ? 1 : options.sim.jobs;
            auto traj = thermal_average(spec, nbar0, 0, ta);
            out.populations[i] = traj.populations.back();
            point_warnings[i] = std::move(traj.warnings);
        } catch (const std::exception& e) {
            out.errors[i] = e.what();
        }
    });
    for (const auto& w : point_warnings) {
        for (const auto& s : w) add_unique(out.warnings, s);
    }
    out.peaks = find_peaks(out.detunings, out.populations, options.prominence);
    return out;
}

// ---------------------------------------------------------------- Rabi traces

TrajectoryResult rabi_trace(const PhysicalConfig& cfg, const PulseSpec& pulse, std::span<const double> durations,
                            double nbar0, const SimulationSettings& sim) {
    require_physical(cfg);
    if (durations.empty()) throw DomainError("duration grid is empty");
    if (!(nbar0 >= 0.0)) throw DomainError("nbar0 must be >= 0");
    const double t_end = durations.back();
    if (!(t_end > 0.0)) throw DomainError("duration grid must end after t = 0");

    const HilbertDims dims(sim.fock_levels);
    SpinMotionOperator op = pulse.model == ModelKind::Full
                                ? full_operator(cfg, pulse.detuning, nbar0, sim)
                                : SpinMotionOperator::from_static(branch_hamiltonian(cfg, dims, pulse.branch), dims);
    auto spec = make_spec(std::move(op), t_end, {durations.begin(), durations.end()}, cfg.coherence_time, sim);
    ThermalAverageOptions ta;
    ta.window_half_width = sim.window_half_width;
    ta.jobs = sim.jobs;
    return thermal_average(spec, nbar0, 0, ta);
}

std::vector<RabiScanPoint> rabi_vs_lattice_frequency(const PhysicalConfig& cfg, std::span<const double> running_freqs,
                                                     std::span<const SidebandBranch> branches,
                                                     const RabiScanOptions& options) {
    std::vector<RabiScanPoint> points;
    for (double wr : running_freqs) {
        for (auto b : branches) {
            RabiScanPoint p;
            p.running_freq = wr;
            p.branch = b;
            points.push_back(std::move(p));
        }
    }
    const bool outer = points.size() >= static_cast<std::size_t>(std::max(1, options.sim.jobs));
    SimulationSettings inner = options.sim;
    inner.jobs = outer ? 1 : options.sim.jobs;

    parallel_for(points.size(), outer ? options.sim.jobs : 1, [&](std::size_t idx) {
        auto& p = points[idx];
        PhysicalConfig point = cfg;
        point.running_freq = p.running_freq;
        try {
            p.predicted = predicted_rabi(point, p.branch);
        } catch (const ResonanceError& e) {
            p.error = e.what();
        }
        try {
            double duration = options.fallback_duration;
            if (p.predicted && *p.predicted > 0.0) {
                const double periods = p.branch == SidebandBranch::CarrierC1 ? options.c1_periods : options.periods;
                duration = periods * units::kTwoPi / *p.predicted;
            }
            const auto times = uniform_samples(duration, options.samples);
            PulseSpec pulse{resonant_detuning(point, p.branch), duration, ModelKind::Full, p.branch};
            auto traj = rabi_trace(point, pulse, times, options.nbar0, inner);
            p.trace_times = traj.times;
            p.trace_populations = traj.populations;

            FitResult fit;
            if (p.branch == SidebandBranch::CarrierC1) {
                fit = fit_damped_sinusoid(p.trace_times, p.trace_populations);
                p.measured = fit.value("omega");
                p.measured_uncertainty = fit.uncertainty("omega");
            } else {
                fit = fit_thermal_rabi(p.trace_times, p.trace_populations, std::nullopt,
                                       is_red(p.branch) ? SidebandKind::Red : SidebandKind::Blue,
                                       point.coherence_time);
                p.measured = fit.value("rabi");
                p.measured_uncertainty = fit.uncertainty("rabi");
                p.fitted_nbar = fit.value("nbar");
            }
            p.fit_converged = fit.converged;
            if (!std::isfinite(*p.measured)) p.measured.reset();
            if (!fit.converged && p.error.empty()) p.error = "fit: " + fit.message;
        } catch (const std::exception& e) {
            p.error = p.error.empty() ? std::string(e.what()) : p.error + "; " + e.what();
        }
    });
    return points;
}

// ---------------------------------------------------------------- cooling

JointState optical_pumping_reset(const JointState& state) {
    const auto pops = optical_pumping_reset(state.populations());
    const int n = state.dims().fock_levels();
    return JointState::product_diagonal(state.dims(), 0, {pops.begin(), pops.begin() + n});
}

std::vector<double> optical_pumping_reset(std::span<const double> populations) {
    if (populations.size() % 2 != 0) throw DimensionError("joint populations must have length 2N");
    const std::size_t n = populations.size() / 2;
    std::vector<double> out(populations.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) out[k] = populations[k] + populations[n + k];
    return out;
}

CoolingSchedule CoolingSchedule::for_config(const PhysicalConfig& cfg) {
    CoolingSchedule s;
    s.detuning = cfg.running_freq - cfg.omega_z;
    return s;
}

double CoolingSchedule::pulse_duration(int k) const {
    if (pulse_count == 1) return first_duration;
    return first_duration + (last_duration - first_duration) * k / (pulse_count - 1);
}

double CoolingSchedule::total_time() const {
    double t = 0.0;
    for (int k = 0; k < pulse_count; ++k) t += pulse_duration(k) + repump_duration;
    return t;
}

void CoolingSchedule::validate() const {
    if (pulse_count < 1) throw DomainError("cooling schedule needs at least one pulse");
    if (!(first_duration > 0.0) || !(last_duration > 0.0)) throw DomainError("cooling pulse durations must be > 0");
    if (repump_duration < 0.0) throw DomainError("repump duration must be >= 0");
    if (!std::isfinite(detuning)) throw DomainError("cooling detuning must be finite");
}

ThermometryResult sideband_asymmetry_thermometry(double p_red, double p_blue) {
    ThermometryResult r;
    if (!(p_blue > 0.0)) {
        r.flag = "undefined";
        r.nbar = kNaN;
        r.ratio = kNaN;
        return r;
    }
    if (p_red < 0.0 || p_blue > 1.0 || !std::isfinite(p_red)) {
        r.flag = "out_of_range";
        r.nbar = kNaN;
        r.ratio = p_red / p_blue;
        return r;
    }
    r.ratio = p_red / p_blue;
    if (p_red >= p_blue) {
        r.flag = "non_thermal";
        r.nbar = std::numeric_limits<double>::infinity();
        return r;
    }
    r.nbar = r.ratio / (1.0 - r.ratio);
    r.valid = true;
    return r;
}

double effective_sideband_probe(const PhysicalConfig& cfg, std::span<const double> phonon_probs, bool red,
                                double duration, double offset) {
    const double half_rabi =
        0.5 * predicted_rabi(cfg, red ? SidebandBranch::RedMinus : SidebandBranch::BlueMinus);
    const double t2 = cfg.has_dephasing() ? cfg.coherence_time : 0.0;
    double p1 = 0.0;
    for (std::size_t n = 0; n < phonon_probs.size(); ++n) {
        const double w = phonon_probs[n];
        if (w <= 0.0) continue;
        const double k = red ? static_cast<double>(n) : static_cast<double>(n + 1);
        if (k == 0.0) continue;
        p1 += w * two_level_excitation(half_rabi * std::sqrt(k), offset, duration, t2);
    }
    return p1;
}

namespace {

SidebandProbe probe_sidebands(const PhysicalConfig& cfg, std::span<const double> phonon_probs, double duration,
                              const CoolingOptions& options) {
    SidebandProbe probe;
    probe.duration = duration;
    probe.red_center = branch_detuning(cfg, SidebandBranch::RedMinus);
    probe.blue_center = branch_detuning(cfg, SidebandBranch::BlueMinus);
    const int count = std::max(2, options.probe_points);
    probe.offsets = linear_grid(-options.probe_span, options.probe_span, static_cast<std::size_t>(count));
    probe.red.resize(probe.offsets.size());
    probe.blue.resize(probe.offsets.size());
    parallel_for(probe.offsets.size(), options.sim.jobs, [&](std::size_t i) {
        probe.red[i] = effective_sideband_probe(cfg, phonon_probs, true, duration, probe.offsets[i]);
        probe.blue[i] = effective_sideband_probe(cfg, phonon_probs, false, duration, probe.offsets[i]);
    });
    return probe;
}

// One red-sideband pulse followed by the reset, effective model: |0,n> -> |1,n-1>
// with the exact dephased two-level transfer probability.
void effective_cooling_pulse(std::vector<double>& p, double half_rabi, double offset, double duration, double t2) {
    std::vector<double> next = p;
    for (std::size_t n = 1; n < p.size(); ++n) {
        if (p[n] <= kCoolingWeightFloor) continue;
        const double moved = p[n] * two_level_excitation(half_rabi * std::sqrt(static_cast<double>(n)), offset,
                                                          duration, t2);
        next[n] -= moved;
        next[n - 1] += moved;
    }
    p = std::move(next);
}

// Full model: each occupied |0,n> evolves on a Fock window; the reset folds
// the resulting joint populations back onto the phonon distribution.
void full_cooling_pulse(std::vector<double>& p, const SpinMotionOperator& op, double duration, double t2,
                        const SimulationSettings& sim) {
    const int levels = static_cast<int>(p.size());
    const int half = sim.window_half_width < 0 ? levels : std::max(1, sim.window_half_width);
    std::vector<int> occupied;
    for (int n = 0; n < levels; ++n) {
        if (p[static_cast<std::size_t>(n)] > kCoolingWeightFloor) occupied.push_back(n);
    }
    std::vector<std::vector<double>> transfer(occupied.size());
    std::vector<int> window_first(occupied.size());
    parallel_for(occupied.size(), sim.jobs, [&](std::size_t idx) {
        const int n = occupied[idx];
        const int size = std::min(levels, 2 * half + 1);
        const int lo = std::clamp(n - half, 0, levels - size);
        auto sub_op = size == levels ? op : op.window(lo, size);
        const HilbertDims sub_dims(size);
        auto spec = make_spec(std::move(sub_op), duration, {duration}, t2, sim);
        const auto psi0 = JointState::basis(sub_dims, 0, n - lo);
        const auto traj = t2 > 0.0 ? evolve_density(spec, psi0) : evolve_pure(spec, psi0);
        transfer[idx] = optical_pumping_reset(traj.final_state->populations());
        transfer[idx].resize(static_cast<std::size_t>(size));
        window_first[idx] = lo;
    });
    std::vector<double> next(p.size(), 0.0);
    for (std::size_t idx = 0; idx < occupied.size(); ++idx) {
        const double w = p[static_cast<std::size_t>(occupied[idx])];
        for (std::size_t m = 0; m < transfer[idx].size(); ++m) {
            next[static_cast<std::size_t>(window_first[idx]) + m] += w * transfer[idx][m];
        }
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto& v : next) v /= total;
    p = std::move(next);
}

}  // namespace

JointState CoolingResult::final_state() const {
    return JointState::product_diagonal(HilbertDims(fock_levels), 0, phonon_populations);
}

CoolingResult sideband_cooling(const PhysicalConfig& cfg, const CoolingSchedule& schedule, double nbar0,
                               const CoolingOptions& options) {
    require_physical(cfg);
    schedule.validate();
    if (!(nbar0 >= 0.0) || !std::isfinite(nbar0)) throw DomainError("nbar0 must be finite and >= 0");

    CoolingResult out;
    out.initial_nbar = nbar0;
    out.fock_levels = cooling_levels(nbar0, options, out.warnings);
    std::vector<double> p = thermal_distribution(nbar0, out.fock_levels).probabilities;
    const double t2 = cfg.has_dephasing() ? cfg.coherence_time : 0.0;

    out.before = probe_sidebands(cfg, p, options.probe_before, options);
    out.nbar.reserve(static_cast<std::size_t>(schedule.pulse_count));

    if (options.model == ModelKind::Effective) {
        SidebandBranch branch = SidebandBranch::RedMinus;
        double offset = schedule.detuning - branch_detuning(cfg, SidebandBranch::RedMinus);
        const double plus_offset = schedule.detuning - branch_detuning(cfg, SidebandBranch::RedPlus);
        if (std::abs(plus_offset) < std::abs(offset)) {
            branch = SidebandBranch::RedPlus;
            offset = plus_offset;
        }
        if (std::abs(offset) > kResonanceTolerance) {
            std::ostringstream msg;
            msg << "effective-model cooling needs a first red sideband; detuning " << units::to_khz(schedule.detuning)
                << " kHz is " << units::to_khz(std::abs(offset))
                << " kHz from the nearest one (use the full model for other resonances)";
            throw ConfigurationError(msg.str());
        }
        const double half_rabi = 0.5 * predicted_rabi(cfg, branch);
        for (int k = 0; k < schedule.pulse_count; ++k) {
            effective_cooling_pulse(p, half_rabi, offset, schedule.pulse_duration(k), t2);
            out.nbar.push_back(mean_phonons(p));
        }
    } else {
        SimulationSettings sim = options.sim;
        sim.fock_levels = out.fock_levels;
        double drive = schedule.detuning;
        if (options.track_light_shift) drive -= carrier_light_shift(cfg, drive);
        const auto op = full_operator(cfg, drive, nbar0, sim);
        for (int k = 0; k < schedule.pulse_count; ++k) {
            full_cooling_pulse(p, op, schedule.pulse_duration(k), t2, sim);
            out.nbar.push_back(mean_phonons(p));
        }
    }

    out.phonon_populations = p;
    out.after = probe_sidebands(cfg, p, options.probe_after, options);
    out.thermometry = sideband_asymmetry_thermometry(effective_sideband_probe(cfg, p, true, options.probe_after),
                                                     effective_sideband_probe(cfg, p, false, options.probe_after));
    return out;
}

// ---------------------------------------------------------------- noise

std::vector<double> add_gaussian_noise(std::span<const double> values, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp(values[i] + sigma * noise(rng), 0.0, 1.0);
    return out;
}

std::vector<double> add_binomial_noise(std::span<const double> values, int shots, std::uint64_t seed) {
    if (shots < 1) throw DomainError("shot count must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::binomial_distribution<int> draw(shots, std::clamp(values[i], 0.0, 1.0));
        out[i] = static_cast<double>(draw(rng)) / shots;
    }
    return out;
}

}  // namespace ionlattice
