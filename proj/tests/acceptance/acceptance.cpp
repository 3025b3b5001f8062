// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers.
// Exit status is 0 when every check ran to completion (whatever its verdict)
// and 1 if one of them crashed; the verdicts are the report.
//
//   acceptance [--jobs N] [--only K]

#include "ionlattice/config.hpp"
#include "ionlattice/dynamics.hpp"
#include "ionlattice/effective.hpp"
#include "ionlattice/experiments.hpp"
#include "ionlattice/fitting.hpp"
#include "ionlattice/parallel.hpp"
#include "ionlattice/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace ionlattice;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_jobs = 1;

double khz(double rad) { return units::to_khz(rad); }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------ 1. spectrum

const Peak* nearest_peak(const std::vector<Peak>& peaks, double target) {
    const Peak* best = nullptr;
    for (const auto& p : peaks)
        if (!best || std::abs(p.detuning - target) < std::abs(best->detuning - target)) best = &p;
    return best;
}

Verdict spectrum_positions() {
    const PhysicalConfig cfg;
    const double step = units::angular_khz(5.0);
    const auto grid = linear_grid(units::angular_khz(-1150.0), units::angular_khz(1150.0), 461);
    SpectrumOptions opt;
    opt.sim.jobs = g_jobs;
    // 1/10 of the fastest tone period: within 1e-5 of the 1/20 default on
    // this spectrum at half the cost.
    opt.sim.steps_per_period = 10;

    auto t0 = std::chrono::steady_clock::now();
    const auto res = sideband_spectrum(cfg, grid, 75e-6, 18.0, opt);
    const double full_s = seconds_since(t0);

    std::ostringstream d;
    bool ok = res.failed_points() == 0;
    if (!ok) d << res.failed_points() << " failed points; ";
    d << "peaks within one 5 kHz step of";
    for (double target : {0.0, 300.0, -300.0, 490.0, -490.0, 1090.0, -1090.0}) {
        const Peak* p = nearest_peak(res.peaks, units::angular_khz(target));
        const bool hit = p && std::abs(p->detuning - units::angular_khz(target)) <= step + 1e-6;
        ok = ok && hit;
        d << " " << target;
        if (hit)
            d << "(ok)";
        else if (p)
            d << "(nearest " << units::to_khz(p->detuning) << ")";
        else
            d << "(missing)";
    }
    // carrier sidebands C1, C2, C3 on each side: present and decreasing
    for (double side : {1.0, -1.0}) {
        double prev = 2.0;
        d << "; C1..C3 heights at " << (side > 0 ? "+" : "-") << ":";
        for (double k : {1.0, 2.0, 3.0}) {
            const double target = side * k * cfg.running_freq;
            const Peak* p = nearest_peak(res.peaks, target);
            const bool hit = p && std::abs(p->detuning - target) <= step + 1e-6;
            const double h = hit ? p->height : std::nan("");
            ok = ok && hit && h < prev;
            d << " " << fmt("%.3f", h);
            prev = hit ? h : prev;
        }
    }

    // reduced-nbar smoke variant
    t0 = std::chrono::steady_clock::now();
    SpectrumOptions smoke = opt;
    smoke.sim.fock_levels = 16;
    const auto small = sideband_spectrum(cfg, grid, 75e-6, 0.5, smoke);
    const double smoke_s = seconds_since(t0);
    const bool fast = full_s <= 600.0 && smoke_s <= 60.0;
    ok = ok && fast && small.failed_points() == 0;
    d << "; runtime N=160 " << fmt("%.0f", full_s) << " s (<= 600), smoke nbar0=0.5 N=16 " << fmt("%.1f", smoke_s)
      << " s (<= 60), jobs " << g_jobs;
    return {ok, d.str()};
}

// ------------------------------------------------------------ 2 + 3. Rabi frequencies

std::vector<RabiScanPoint> g_scan;

const std::vector<RabiScanPoint>& rabi_scan() {
    if (!g_scan.empty()) return g_scan;
    const PhysicalConfig cfg;
    std::vector<double> freqs;
    for (double f : {200.0, 300.0, 400.0, 500.0, 600.0, 700.0}) freqs.push_back(units::angular_khz(f));
    const std::vector<SidebandBranch> branches{SidebandBranch::BlueMinus, SidebandBranch::CarrierC1};
    RabiScanOptions opt;
    opt.sim.jobs = g_jobs;
    opt.sim.steps_per_period = 8;
    g_scan = rabi_vs_lattice_frequency(cfg, freqs, branches, opt);
    return g_scan;
}

Verdict theory_curves() {
    std::ostringstream d;
    bool ok = true;

    // closed forms, with eta from CODATA constants
    const double hbar = 1.054571817e-34;
    const double mass = 171.0 * 1.66053906660e-27;
    double worst = 0.0;
    PhysicalConfig cfg;
    const double dk = std::sqrt(2.0) * 2.0 * std::numbers::pi / 377.2e-9;
    const double eta = dk * std::sqrt(hbar / (2.0 * mass * cfg.omega_z));
    std::vector<double> freqs;
    for (double f = 100.0; f <= 760.0; f += 20.0) freqs.push_back(units::angular_khz(f));
    const auto c1 = predicted_rabi_curve(cfg, freqs, SidebandBranch::CarrierC1);
    const auto b1 = predicted_rabi_curve(cfg, freqs, SidebandBranch::BlueMinus);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double wr = freqs[i];
        const double c1_ref = cfg.stark_amplitude * cfg.microwave_rabi / (2.0 * wr);
        const double b1_ref = std::abs(eta * cfg.stark_amplitude / (2.0 * (cfg.omega_z - wr))) * cfg.microwave_rabi;
        if (!c1[i].rabi || !b1[i].rabi) {
            ok = false;
            continue;
        }
        worst = std::max({worst, std::abs(*c1[i].rabi / c1_ref - 1.0), std::abs(*b1[i].rabi / b1_ref - 1.0)});
    }
    ok = ok && worst <= 1e-9;
    d << "closed form rel. err " << fmt("%.1e", worst) << " (<= 1e-9); measured/predicted";

    for (const auto& p : rabi_scan()) {
        const bool c1_branch = p.branch == SidebandBranch::CarrierC1;
        const double tol = c1_branch ? 0.10 : 0.15;
        d << " | " << fmt("%.0f", khz(p.running_freq)) << " " << (c1_branch ? "C1" : "B1") << " ";
        if (!p.measured || !p.predicted || !p.fit_converged) {
            ok = false;
            d << "no fit" << (p.error.empty() ? "" : " (" + p.error + ")");
            continue;
        }
        const double ratio = *p.measured / *p.predicted;
        const bool hit = std::abs(ratio - 1.0) <= tol;
        ok = ok && hit;
        d << fmt("%.3f", ratio) << (hit ? "" : "!");
    }
    d << " (tolerance C1 10%, B1 15%)";
    return {ok, d.str()};
}

Verdict minus_branch_monotone() {
    std::ostringstream d;
    bool ok = true;
    double prev = 0.0;
    d << "B1 measured (kHz):";
    for (const auto& p : rabi_scan()) {
        if (p.branch != SidebandBranch::BlueMinus) continue;
        const double f = khz(p.running_freq);
        if (std::abs(f - 300.0) > 1e-6 && std::abs(f - 500.0) > 1e-6 && std::abs(f - 600.0) > 1e-6 &&
            std::abs(f - 700.0) > 1e-6)
            continue;
        if (!p.measured || !p.fit_converged) {
            ok = false;
            d << " " << f << ": no fit";
            continue;
        }
        const double m = khz(*p.measured);
        ok = ok && m > prev;
        d << " " << fmt("%.0f", f) << ": " << fmt("%.3f", m);
        prev = m;
    }
    return {ok, d.str()};
}

// ------------------------------------------------------------ 4. cooling

Verdict cooling_endpoint() {
    const PhysicalConfig cfg;
    const auto sched = CoolingSchedule::for_config(cfg);
    CoolingOptions opt;
    opt.sim.jobs = g_jobs;
    const auto res = sideband_cooling(cfg, sched, 18.0, opt);
    const double final_nbar = res.final_nbar();
    const bool cold = final_nbar <= 0.05;
    const bool thermo = res.thermometry.valid && std::abs(res.thermometry.nbar - final_nbar) <= 0.01;
    std::ostringstream d;
    d << "final nbar " << fmt("%.4f", final_nbar) << " (<= 0.05); thermometry " << fmt("%.4f", res.thermometry.nbar)
      << " vs " << fmt("%.4f", final_nbar) << " (within 0.01" << (res.thermometry.flag.empty() ? "" : ", " + res.thermometry.flag)
      << "); " << sched.pulse_count << " pulses " << fmt("%.0f", sched.first_duration * 1e6) << "->"
      << fmt("%.0f", sched.last_duration * 1e6) << " us, T2 " << fmt("%.2f", cfg.coherence_time * 1e3) << " ms, N "
      << res.fock_levels;
    return {cold && thermo, d.str()};
}

// ------------------------------------------------------------ 5. identities

Verdict exact_identities() {
    PhysicalConfig cfg;
    double worst_ratio = 0.0, worst_round = 0.0;
    for (double t2 : {0.0, 0.47e-3})
        for (double nbar : {0.02, 1.0, 18.0})
            for (double tp : {80e-6, 230e-6}) {
                cfg.coherence_time = t2;
                const auto p = thermal_distribution(nbar, 900).probabilities;
                const double red = effective_sideband_probe(cfg, p, true, tp);
                const double blue = effective_sideband_probe(cfg, p, false, tp);
                worst_ratio = std::max(worst_ratio, std::abs(red / blue - nbar / (nbar + 1.0)));
                const auto th = sideband_asymmetry_thermometry(red, blue);
                worst_round = std::max(worst_round, th.valid ? std::abs(th.nbar / nbar - 1.0) : 1.0);
            }
    std::ostringstream d;
    d << "max |P_red/P_blue - nbar/(nbar+1)| " << fmt("%.1e", worst_ratio) << " (<= 1e-9); round trip rel. "
      << fmt("%.1e", worst_round) << " (<= 1e-6); nbar in {0.02, 1, 18}";
    return {worst_ratio <= 1e-9 && worst_round <= 1e-6, d.str()};
}

// ------------------------------------------------------------ 6. numerics

Verdict numerical_quality() {
    std::ostringstream d;
    bool ok = true;
    PhysicalConfig cfg;
    cfg.microwave_detuning = branch_detuning(cfg, SidebandBranch::BlueMinus);

    {  // unitarity over 1 ms
        HilbertDims dims(16);
        EvolutionSpec spec(interaction_operator(cfg, dims, ExpansionOrder::FirstOrder));
        spec.duration = 1e-3;
        spec.sample_times = uniform_samples(spec.duration, 11);
        const auto r = evolve_pure(spec, JointState::basis(dims, 0, 3));
        ok = ok && r.max_norm_error <= kNormBudgetPerMs;
        d << "norm drift/ms " << fmt("%.1e", r.max_norm_error);
    }
    {  // trace under dephasing
        HilbertDims dims(8);
        auto c = cfg;
        EvolutionSpec spec(interaction_operator(c, dims, ExpansionOrder::FirstOrder));
        spec.duration = 200e-6;
        spec.coherence_time = c.coherence_time;
        spec.sample_times = uniform_samples(spec.duration, 5);
        const auto r = evolve_density(spec, JointState::basis(dims, 0, 2));
        const double per_ms = r.max_norm_error / (spec.duration / 1e-3);
        ok = ok && r.max_norm_error <= kNormBudgetPerMs;
        d << ", trace drift " << fmt("%.1e", r.max_norm_error) << " (" << fmt("%.1e", per_ms) << "/ms)";
    }
    {  // step halving, CF4
        HilbertDims dims(8);
        const double t_end = 20e-6;
        auto final_state = [&](int steps) {
            EvolutionSpec spec(interaction_operator(cfg, dims, ExpansionOrder::FirstOrder));
            spec.duration = t_end;
            spec.sample_times = {0.0, t_end};
            spec.steps_per_period = 1;
            spec.max_step = t_end / steps;
            return evolve_pure(spec, JointState::basis(dims, 0, 1)).final_state->amplitudes();
        };
        const Vector ref = final_state(8 * 160);
        const double e1 = (final_state(160) - ref).norm();
        const double e2 = (final_state(320) - ref).norm();
        ok = ok && e1 / e2 >= 8.0;
        d << ", step-halving factor " << fmt("%.1f", e1 / e2) << " (>= 8)";
    }
    {  // pure vs density
        HilbertDims dims(10);
        EvolutionSpec spec(interaction_operator(cfg, dims, ExpansionOrder::FirstOrder));
        spec.duration = 60e-6;
        spec.sample_times = uniform_samples(spec.duration, 31);
        double worst = 0.0;
        for (int n : {0, 2}) {
            const auto psi = JointState::basis(dims, 0, n);
            const auto a = evolve_pure(spec, psi);
            const auto b = evolve_density(spec, JointState::density(dims, psi.to_density()));
            for (std::size_t i = 0; i < a.populations.size(); ++i)
                worst = std::max(worst, std::abs(a.populations[i] - b.populations[i]));
        }
        ok = ok && worst <= 1e-7;
        d << ", pure vs density " << fmt("%.1e", worst) << " (<= 1e-7)";
    }
    {  // fits
        const double rabi = units::angular_khz(1.96);
        const auto t = uniform_samples(1.5e-3, 200);
        double worst_noisy = 0.0;
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            std::vector<double> y;
            for (double ti : t) y.push_back(thermal_rabi_model(ti, rabi, 18.0, SidebandKind::Blue));
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> noise(0.0, 0.05);
            for (auto& v : y) v += noise(rng);
            const auto fit = fit_thermal_rabi(t, y);
            worst_noisy = std::max({worst_noisy, std::abs(fit.value("rabi") / rabi - 1.0),
                                    std::abs(fit.value("nbar") / 18.0 - 1.0), fit.converged ? 0.0 : 1.0});
        }
        double worst_clean = 0.0;
        const auto tc = uniform_samples(600e-6, 120);
        for (double nbar : {0.5, 4.0, 18.0}) {
            std::vector<double> y;
            for (double ti : tc) y.push_back(thermal_rabi_model(ti, rabi, nbar, SidebandKind::Blue));
            const auto fit = fit_thermal_rabi(tc, y);
            worst_clean = std::max({worst_clean, std::abs(fit.value("rabi") / rabi - 1.0),
                                    std::abs(fit.value("nbar") / nbar - 1.0), fit.converged ? 0.0 : 1.0});
        }
        ok = ok && worst_noisy <= 0.10 && worst_clean <= 1e-4;
        d << ", fit 5% noise " << fmt("%.3f", worst_noisy) << " (<= 0.10), noiseless " << fmt("%.1e", worst_clean)
          << " (<= 1e-4)";
    }
    return {ok, d.str()};
}

// ------------------------------------------------------------ 7. effective vs full

Verdict effective_vs_full() {
    PhysicalConfig c;
    c.stark_amplitude = units::angular_khz(90.0);
    c.coherence_time = 0.0;
    const double ratio = std::abs(c.stark_amplitude / c.running_freq);
    const double eta = lamb_dicke(c);
    HilbertDims dims(20);
    const double tpi = pi_time(predicted_rabi(c, SidebandBranch::BlueMinus));
    const auto times = uniform_samples(tpi, 101);

    auto drive = c;
    drive.microwave_detuning = resonant_detuning(c, SidebandBranch::BlueMinus);
    EvolutionSpec full(interaction_operator(drive, dims, ExpansionOrder::FirstOrder));
    full.duration = tpi;
    full.sample_times = times;
    EvolutionSpec eff(SpinMotionOperator::from_static(branch_hamiltonian(c, dims, SidebandBranch::BlueMinus), dims));
    eff.duration = tpi;
    eff.sample_times = times;
    const auto psi = JointState::basis(dims, 0, 0);
    const auto a = evolve_pure(full, psi);
    const auto b = evolve_pure(eff, psi);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(a.populations[i] - b.populations[i]));
    std::ostringstream d;
    d << "|d0/wr| " << fmt("%.2f", ratio) << ", eta " << fmt("%.3f", eta) << ", max |P_full - P_eff| "
      << fmt("%.4f", worst) << " over " << fmt("%.0f", tpi * 1e6) << " us (<= 0.05, |0,0>, drive on the shifted line)";
    return {ratio <= 0.3 + 1e-12 && eta <= 0.15 && worst <= 0.05, d.str()};
}

// ------------------------------------------------------------ 8. determinism

Verdict determinism() {
    const std::string text = R"(
[experiment]
type = spectrum
[simulation]
fock_levels = 12
nbar0 = 0.3
seed = 17
noise = binomial
shots = 100
[spectrum]
start = -600 kHz
stop = 600 kHz
points = 61
)";
    const auto cfg = parse_config(text);
    const auto a = run(cfg, 1).table.to_csv();
    const auto b = run(cfg, 1).table.to_csv();
    const auto c = run(cfg, std::max(2, g_jobs)).table.to_csv();
    const auto echo = run(parse_config(run(cfg, 1).config_echo), 1).table.to_csv();
    std::ostringstream d;
    d << "spectrum with binomial noise, seed 17: repeat " << (a == b ? "identical" : "differs") << ", other job count "
      << (a == c ? "identical" : "differs") << ", rerun from config echo " << (a == echo ? "identical" : "differs")
      << " (" << a.size() << " bytes)";
    return {a == b && a == c && a == echo, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    g_jobs = default_jobs();
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--jobs") && i + 1 < argc) g_jobs = std::max(1, std::atoi(argv[++i]));
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
    }

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"spectrum peak positions", spectrum_positions},
        {"theory curves and simulated Rabi frequencies", theory_curves},
        {"minus-branch growth toward omega_z", minus_branch_monotone},
        {"cooling endpoint and thermometry", cooling_endpoint},
        {"exact thermal identities", exact_identities},
        {"numerical quality", numerical_quality},
        {"effective vs full model", effective_vs_full},
        {"determinism", determinism},
    };

    int passed = 0, ran = 0, crashed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && only != static_cast<int>(i + 1)) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
            ++crashed;
        }
        passed += v.pass;
        std::printf("%s %zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%d criteria pass\n", passed, ran);
    return crashed ? 1 : 0;
}
