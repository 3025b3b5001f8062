#include "ionlattice/config.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ionlattice;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kPaperCfg = std::string(IONLATTICE_SOURCE_DIR) + "/configs/paper.cfg";

// Runs parse_config and returns the ConfigParseError it throws.
ConfigParseError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigParseError& e) {
        return e;
    }
    FAIL("expected a ConfigParseError");
    return ConfigParseError("", 0, "");
}

}  // namespace

TEST_CASE("missing experiment selector") {
    const auto e = parse_error("[experiment]\n[physics]\nomega_r = 300 kHz\n");
    CHECK(e.key() == "experiment.type");
    CHECK(std::string(e.what()).find("selector") != std::string::npos);
    CHECK_NOTHROW(parse_config("[physics]\nomega_r = 300 kHz\n", Experiment::Cool));
}

TEST_CASE("unit suffixes are mandatory") {
    const auto e = parse_error("[experiment]\ntype = spectrum\n[physics]\nomega_r = 300\n");
    CHECK(e.key() == "physics.omega_r");
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("unit") != std::string::npos);
    CHECK_THROWS_AS(parse_config("[experiment]\ntype = rabi\n[rabi]\nduration = 600 kHz\n"), ConfigParseError);
    CHECK(parse_config("[experiment]\ntype = rabi\n[physics]\nomega_r = 300kHz\n").physics.running_hz == 300e3);
}

TEST_CASE("errors carry key and line") {
    SUBCASE("unknown key") {
        const auto e = parse_error("[experiment]\ntype = spectrum\n\n[physics]\nomega_q = 3 kHz\n");
        CHECK(e.key() == "physics.omega_q");
        CHECK(e.line() == 5);
    }
    SUBCASE("out of range") {
        const auto e = parse_error("[experiment]\ntype = spectrum\n[simulation]\nfock_levels = 1\n");
        CHECK(e.key() == "simulation.fock_levels");
        CHECK(e.line() == 4);
    }
    SUBCASE("duplicate key") {
        const auto e = parse_error("[experiment]\ntype = spectrum\n[physics]\nrabi = 1 kHz\nrabi = 2 kHz\n");
        CHECK(e.line() == 5);
    }
    SUBCASE("unknown section, bad selector") {
        CHECK(parse_error("[phyiscs]\n").line() == 1);
        CHECK(parse_error("[experiment]\ntype = spectra\n").key() == "experiment.type");
    }
}

TEST_CASE("shipped paper configuration") {
    const auto cfg = load_config(kPaperCfg);
    const auto& p = cfg.physics;
    CHECK(cfg.experiment == Experiment::Spectrum);
    CHECK(p.omega_x_hz == 0.91e6);
    CHECK(p.omega_y_hz == 0.97e6);
    CHECK(p.omega_z_hz == 0.79e6);
    CHECK(p.running_hz == 300e3);
    CHECK(p.stark_hz == 310e3);
    CHECK(p.rabi_hz == 43e3);
    CHECK(p.wavelength_m == 377.2e-9);
    CHECK(p.t2_s == 0.47e-3);
    CHECK(p.mass_u == 171.0);
    CHECK(cfg.cool.pulses == 200);
    CHECK(cfg.cool.first_s == 60e-6);
    CHECK(cfg.cool.last_s == 230e-6);
    CHECK(cfg.cool.repump_s == 5e-6);
    CHECK(cfg.simulation.nbar0 == 18.0);

    // Defaults equal the shipped file, apart from the selector-free bits.
    auto bare = parse_config("[experiment]\ntype = spectrum\n");
    CHECK(bare.physics == cfg.physics);

    const auto echo = echo_config(cfg);
    for (const char* key : {"omega_x = ", "omega_z = ", "stark_shift = ", "rabi = ", "t2 = ", "wavelength = ", "mass = "})
        CHECK(echo.find(key) != std::string::npos);
}

TEST_CASE("echo round-trips") {
    const auto cfg = load_config(kPaperCfg);
    const auto again = parse_config(echo_config(cfg));
    CHECK(again == cfg);
    CHECK(echo_config(again) == echo_config(cfg));

    auto odd = parse_config(
        "[experiment]\ntype = cool\n[physics]\nomega_r = 123.456789 kHz\nt2 = 0 s\n[cool]\nlight_shift = false\n"
        "[rabi_scan]\nomega_r = 0.35 MHz, 7e5 Hz\nbranches = red_plus\n");
    CHECK(parse_config(echo_config(odd)) == odd);
    CHECK(odd.physics.t2_s == 0.0);
    CHECK_FALSE(odd.cool.light_shift);
}

TEST_CASE("frequencies are ordinary; conversion is exact") {
    const auto cfg = parse_config("[experiment]\ntype = spectrum\n[physics]\nomega_r = 300 kHz\n");
    CHECK(cfg.physics.physical().running_freq == units::kTwoPi * 3e5);
    CHECK(parse_config("[experiment]\ntype = spectrum\n[physics]\nomega_r = 0.3 MHz\n").physics.running_hz == 3e5);
}

TEST_CASE("cooling detuning follows the lattice when not given") {
    const auto cfg = parse_config("[experiment]\ntype = cool\n[physics]\nomega_r = 200 kHz\n");
    CHECK(cfg.cool.detuning_hz == doctest::Approx(-590e3));
}

TEST_CASE("format_double is shortest round-trip") {
    for (double v : {0.1, 1.0 / 3.0, 377.2e-9, 6.02214076e23, -0.0, 5e-324}) {
        const auto s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("load_config reports unreadable files") {
    CHECK_THROWS(load_config("/nonexistent/paper.cfg"));
    CHECK(read_file(kPaperCfg).find("[physics]") != std::string::npos);
}
