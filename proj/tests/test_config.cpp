#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "opasq/config.hpp"

using namespace opasq;

namespace {

std::string source_path(const std::string& rel) {
    const char* src = std::getenv("OPASQ_SRC");
    return (src ? std::string(src) : std::string(".")) + "/" + rel;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool params_equal(const OpaParams& a, const OpaParams& b) {
    return serialize(a) == serialize(b);
}

} // namespace

TEST_CASE("defaults reproduce the canonical parameter set") {
    const OpaParams p = load_params("");
    CHECK(p.z == doctest::Approx(7.5e-3).epsilon(1e-15));
    CHECK(p.xi == doctest::Approx(749.0).epsilon(1e-15));
    CHECK(p.r0 == doctest::Approx(36e-6).epsilon(1e-15));
    CHECK(p.lambda_a == doctest::Approx(1064e-9));
    CHECK(p.rho == doctest::Approx(4648.0));
    CHECK(p.sigma_b_abs == doctest::Approx(4.0)); // 4 %/cm = 4 per metre
    CHECK(*p.pump_fraction == doctest::Approx(0.5));
}

TEST_CASE("shipped canonical config equals the built-in defaults") {
    const OpaParams file = load_params(read_file(source_path("params/table1.cfg")));
    const OpaParams defaults = load_params("");
    CHECK(params_equal(file, defaults));
    // and the shipped file is complete enough to parse without defaults
    CHECK_NOTHROW(load_params(read_file(source_path("params/table1.cfg")), false));
}

TEST_CASE("unit suffixes convert to SI") {
    const OpaParams p = load_params(
        "lambda_a = 1064 nm\n"
        "lambda_b = 532 nm\n"
        "z = 0.75 cm\n"
        "r0 = 36 um\n"
        "R_a_out = 95.6 %\n"
        "sigma_b_abs = 4.0 %/cm\n"
        "P_seed = 1 mW\n"
        "dT_offset = 1 mK\n"
        "rho = 4.648 g/cm3\n"
        "omega_a_det = 0 Hz\n");
    CHECK(p.lambda_a == doctest::Approx(1.064e-6));
    CHECK(p.z == doctest::Approx(7.5e-3));
    CHECK(p.r0 == doctest::Approx(3.6e-5));
    CHECK(p.R_a_out == doctest::Approx(0.956));
    CHECK(p.sigma_b_abs == doctest::Approx(4.0));
    CHECK(p.P_seed == doctest::Approx(1e-3));
    CHECK(p.dT_offset == doctest::Approx(1e-3));
    CHECK(p.rho == doctest::Approx(4648.0));
    CHECK(p.omega_a_det == 0.0);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(load_params("R_a_out = 1.2"), InvariantViolation);
    CHECK_THROWS_AS(load_params("nonsense_key = 1"), UnitParseError);
    CHECK_THROWS_AS(load_params("z = seven mm"), UnitParseError);
    CHECK_THROWS_AS(load_params("z 7.5 mm"), UnitParseError);
    CHECK_THROWS_AS(load_params("z = 7.5 parsec"), UnitParseError);
    CHECK_THROWS_AS(load_params("pump_fraction = 0.5\nP_pump = 1"), InvariantViolation);
    CHECK_THROWS_AS(load_params("lambda_b = 533 nm"), InvariantViolation);
    CHECK_THROWS_AS(load_params("V_A1_in = 0.5\nV_A2_in = 0.5"), InvariantViolation);
    CHECK_THROWS_AS(load_params("", false), MissingKeyError);
}

TEST_CASE("absolute pump power replaces the threshold fraction") {
    const OpaParams p = load_params("P_pump = 250 mW");
    CHECK(!p.pump_fraction.has_value());
    REQUIRE(p.P_pump.has_value());
    CHECK(*p.P_pump == doctest::Approx(0.25));
}

TEST_CASE("derived rates match hand evaluation") {
    const OpaParams p = load_params("");
    const CavityRates r = derive_rates(p);

    // independent evaluation of the conversion convention
    const double tau = 2.0 * 2.233 * 7.5e-3 / 299792458.0;
    CHECK(r.tau_rt == doctest::Approx(tau).epsilon(1e-14));
    CHECK(r.tau_rt == doctest::Approx(1.1173e-10).epsilon(1e-3));
    CHECK(r.a.out == doctest::Approx((1.0 - 0.956) / (2.0 * tau)).epsilon(1e-14));
    CHECK(r.a.out == doctest::Approx(1.97e8).epsilon(0.01));

    // per-pass loss ledger: 4 %/cm over 0.75 cm is 3% per pass, two passes
    // per round trip
    const double round_trip_loss = 2.0 * 0.03;
    CHECK(r.b.abs == doctest::Approx(round_trip_loss / (2.0 * tau)).epsilon(1e-14));
    CHECK(r.b.abs == doctest::Approx(2.69e8).epsilon(0.01));
}

TEST_CASE("perfect mirror and lossless channels zero exactly their own rate") {
    OpaParams p = load_params("");
    p.R_a_out = 1.0;
    const CavityRates base = derive_rates(load_params(""));
    const CavityRates r = derive_rates(p);
    CHECK(r.a.out == 0.0);
    CHECK(r.a.in == base.a.in);
    CHECK(r.a.sc == base.a.sc);
    CHECK(r.a.abs == base.a.abs);
    CHECK(r.b.tot == base.b.tot);

    OpaParams q = load_params("");
    q.sigma_a_sc = 0.0;
    const CavityRates rq = derive_rates(q);
    CHECK(rq.a.sc == 0.0);
    CHECK(rq.a.in == base.a.in);
    CHECK(rq.a.out == base.a.out);
    CHECK(rq.a.abs == base.a.abs);
}

TEST_CASE("gamma_tot sum identity holds exactly for random parameter sets") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> refl(0.0, 1.0);
    std::uniform_real_distribution<double> loss(0.0, 10.0);
    std::uniform_real_distribution<double> len(1e-3, 2e-2);
    for (int trial = 0; trial < 200; ++trial) {
        OpaParams p;
        p.R_a_in = refl(gen);
        p.R_a_out = refl(gen);
        p.R_b_in = refl(gen);
        p.R_b_out = refl(gen);
        p.sigma_a_abs = loss(gen);
        p.sigma_a_sc = loss(gen);
        p.sigma_b_abs = loss(gen);
        p.sigma_b_sc = loss(gen);
        p.z = len(gen);
        const CavityRates r = derive_rates(p);
        CHECK(r.a.tot == r.a.in + r.a.out + r.a.sc + r.a.abs);
        CHECK(r.b.tot == r.b.in + r.b.out + r.b.sc + r.b.abs);
        CHECK(r.tau_rt > 0.0);
    }
}

TEST_CASE("serialize round-trips through load_params") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        OpaParams p;
        p.R_a_in = 0.9 + 0.1 * u(gen);
        p.R_a_out = 0.9 + 0.1 * u(gen);
        p.R_b_in = u(gen);
        p.R_b_out = 0.9 + 0.1 * u(gen);
        p.sigma_a_abs = 10.0 * u(gen);
        p.sigma_b_abs = 10.0 * u(gen);
        p.z = 1e-3 + 1e-2 * u(gen);
        p.kappa0 = 1e6 * u(gen);
        p.P_seed = 0.01 * u(gen);
        p.phi_b = 2.0 * constants::pi * u(gen);
        p.dT_offset = 0.01 * u(gen);
        if (trial % 3 == 0) {
            p.pump_fraction.reset();
            p.P_pump = u(gen);
        } else {
            p.pump_fraction = u(gen);
        }
        if (trial % 4 == 0) {
            p.n_a = 2.0 + u(gen);
            p.n_b = 2.0 + u(gen);
        }
        p.V_A1_in = 1.0 + u(gen);
        p.V_A2_in = 1.0 + u(gen);
        const OpaParams q = load_params(serialize(p));
        CHECK(params_equal(p, q));
    }
}
