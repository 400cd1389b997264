#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "opasq/run.hpp"

using namespace opasq;
namespace fs = std::filesystem;

namespace {

std::string source_path(const std::string& rel) {
    const char* src = std::getenv("OPASQ_SRC");
    return (src ? std::string(src) : std::string(".")) + "/" + rel;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "opasq_run_tests";
    fs::create_directories(d);
    return d;
}

RunRequest base_request(Command cmd, const std::string& out_name) {
    RunRequest req;
    req.command = cmd;
    req.config_path = source_path("params/table1.cfg");
    req.output_path = (scratch_dir() / out_name).string();
    req.grid = {10.0, 1e7, 40};
    return req;
}

} // namespace

TEST_CASE("spectrum runs are byte-identical across invocations") {
    RunRequest req = base_request(Command::spectrum, "spec_a.csv");
    run(req);
    const std::string first = slurp(req.output_path);
    req.output_path = (scratch_dir() / "spec_b.csv").string();
    run(req);
    CHECK(first == slurp(req.output_path));
    CHECK(first.substr(0, 21) == "freq_hz,V1_dB,V2_dB\n1");

    // metadata sidecar exists and records the resolved parameter set
    const std::string meta = slurp(req.output_path + ".meta.json");
    CHECK(meta.find("\"P_seed\": 0.001") != std::string::npos);
    CHECK(meta.find("\"command\": \"spectrum\"") != std::string::npos);
}

TEST_CASE("no-photothermal flag equals zeroed absorption byte for byte") {
    // the flag zeroes absorption and uses the reduced solution; a plain run
    // with the absorption rates zeroed must produce the identical file
    RunRequest a = base_request(Command::spectrum, "nopt_flag.csv");
    a.no_photothermal = true;
    run(a);

    RunRequest b = base_request(Command::spectrum, "nopt_sigma.csv");
    b.overrides.emplace_back("sigma_a_abs", "0");
    b.overrides.emplace_back("sigma_b_abs", "0");
    run(b);

    CHECK(slurp(a.output_path) == slurp(b.output_path));
}

TEST_CASE("multi-value spectra are labeled") {
    RunRequest req = base_request(Command::spectrum, "ladder.csv");
    req.pump_fractions = {0.25, 0.5};
    req.grid = {100.0, 1e6, 12};
    run(req);
    const std::string text = slurp(req.output_path);
    CHECK(text.find("freq_hz,V1_dB,V2_dB,label") == 0);
    CHECK(text.find("pump_frac=0.25") != std::string::npos);
    CHECK(text.find("pump_frac=0.5") != std::string::npos);

    // only one ladder at a time
    req.seed_watts = {1e-3, 2e-3};
    CHECK_THROWS_AS(run(req), InvariantViolation);
}

TEST_CASE("sweep emits pump power in watts") {
    RunRequest req = base_request(Command::sweep, "sweep.csv");
    req.axis = SweepAxis::pump_fraction;
    req.sweep_values = {0.2, 0.4, 0.6};
    req.sweep_freqs_hz = {1e5};
    run(req);
    const std::string text = slurp(req.output_path);
    CHECK(text.find("pump_watts,V1_dB,V2_dB") == 0);
    // one header line plus three data rows
    int newlines = 0;
    for (char c : text)
        if (c == '\n') ++newlines;
    CHECK(newlines == 4);
}

TEST_CASE("gw run emits one block per scheme") {
    RunRequest req = base_request(Command::gw, "gw.csv");
    req.grid = {10.0, 1e4, 20};
    req.ifo.theta = -constants::pi / 2.0;
    req.ifo.gamma_f = 2.0 * constants::pi * 400.0;
    req.overrides.emplace_back("phi_b", "3.14159265358979324");
    req.overrides.emplace_back("P_seed", "0.01");
    req.gw_curves = {{GwCurve::Kind::unsqueezed, true, "unsqueezed"},
                     {GwCurve::Kind::frequency_dependent, true, "frequency-dependent"},
                     {GwCurve::Kind::amplitude_filter, true, "amplitude-filter"}};
    run(req);
    const std::string text = slurp(req.output_path);
    CHECK(text.find("freq_hz,S_over_hsql2_dB,scheme") == 0);
    CHECK(text.find(",unsqueezed") != std::string::npos);
    CHECK(text.find(",frequency-dependent") != std::string::npos);
    CHECK(text.find(",amplitude-filter") != std::string::npos);
}

TEST_CASE("threshold report includes the operating numbers") {
    RunRequest req = base_request(Command::threshold, "threshold.txt");
    run(req);
    const std::string text = slurp(req.output_path);
    CHECK(text.find("P_th_watts = ") != std::string::npos);
    CHECK(text.find("gamma_a_tot = ") != std::string::npos);
    CHECK(text.find("eps_bar_mag_1_per_s = ") != std::string::npos);
    // parse P_th back out and sanity-check the order of magnitude
    const double pth = std::strtod(text.c_str() + text.find("P_th_watts = ") + 13, nullptr);
    CHECK(pth > 0.2);
    CHECK(pth < 5.0);
}

TEST_CASE("config overrides flow through --set semantics") {
    RunRequest req = base_request(Command::threshold, "threshold2.txt");
    req.overrides.emplace_back("R_a_out", "90 %");
    run(req);
    const std::string meta = slurp(req.output_path + ".meta.json");
    CHECK(meta.find("\"R_a_out\": 0.9") != std::string::npos);
}

TEST_CASE("module errors surface with their category") {
    RunRequest req = base_request(Command::spectrum, "never.csv");
    req.overrides.emplace_back("pump_fraction", "1.5");
    try {
        run(req);
        FAIL("expected AboveThreshold");
    } catch (const Error& e) {
        CHECK(e.category() == "AboveThreshold");
    }

    RunRequest bad = base_request(Command::spectrum, "never2.csv");
    bad.config_path = "/nonexistent/path.cfg";
    try {
        run(bad);
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.category() == "IoError");
    }
}

TEST_CASE("cli binary round trip") {
    const char* cli = std::getenv("OPASQ_CLI");
    if (!cli) return; // available only under ctest
    const std::string out1 = (scratch_dir() / "cli1.csv").string();
    const std::string out2 = (scratch_dir() / "cli2.csv").string();
    const std::string cfg = source_path("params/table1.cfg");
    const std::string base = std::string(cli) + " spectrum --config " + cfg +
                             " --fmin-hz 100 --fmax-hz 1e6 --ppd 20 --seed-mw 1 --pump-frac 0.5 "
                             "--phase-squeeze -o ";
    REQUIRE(std::system((base + out1).c_str()) == 0);
    REQUIRE(std::system((base + out2).c_str()) == 0);
    CHECK(slurp(out1) == slurp(out2));

    // invalid config must exit nonzero
    const std::string bad = std::string(cli) + " spectrum --config /nope.cfg -o " +
                            (scratch_dir() / "x.csv").string() + " 2>/dev/null";
    CHECK(std::system(bad.c_str()) != 0);
}
