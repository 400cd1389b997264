#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "opasq/constants.hpp"
#include "opasq/errors.hpp"

namespace opasq {

// Full parameter set of the OPA cavity in canonical SI units, plus the drive
// settings (seed/pump powers and phases, input quadrature noise levels).
struct OpaParams {
    // Defaults are written as (value * unit factor) products so they agree
    // bit-for-bit with the same values parsed from the canonical config file.
    // wavelengths (m)
    double lambda_a = 1064.0 * 1e-9;
    double lambda_b = 532.0 * 1e-9;
    // mirror power reflectivities (dimensionless)
    double R_a_in = 99.96 * 1e-2;
    double R_a_out = 95.6 * 1e-2;
    double R_b_in = 4.0 * 1e-2;
    double R_b_out = 99.96 * 1e-2;
    // intensity loss rates (fraction per metre)
    double sigma_a_abs = 0.1;
    double sigma_a_sc = 0.02;
    double sigma_b_abs = 4.0;
    double sigma_b_sc = 0.5;
    // crystal
    double z = 7.5 * 1e-3;    // length (m)
    double kappa0 = 8.0e5;    // bare nonlinear coupling (1/(m*s))
    double n = 2.233;         // phase-matched refractive index
    std::optional<double> n_a; // per-carrier overrides, default to n
    std::optional<double> n_b;
    // thermal constants
    double C = 633.0;         // specific heat (J/(kg*K))
    double rho = 4.648 * 1e3; // density (kg/m^3)
    double kappa_th = 4.0;    // thermal conductivity (W/(K*m))
    double r0 = 36.0 * 1e-6;  // interaction-mode radius (m)
    double xi = 749.0;        // phase-mismatch constant (1/(m*K))
    double alpha_a = 5e-6;    // thermal expansion (1/K)
    double alpha_b = 5e-6;
    double dn_a_dT = 3.3e-6;  // thermo-refractive coefficients (1/K)
    double dn_b_dT = 37.0e-6;
    double dT_offset = 0.001; // operating temperature minus phase-matching optimum (K)
    // mean cavity detunings (rad/s)
    double omega_a_det = 0.0;
    double omega_b_det = 0.0;
    // drive
    double P_seed = 1.0 * 1e-3; // seed power (W)
    double phi_a = 0.0;       // seed phase (rad)
    double phi_b = 0.0;       // pump phase (rad); 0 = phase squeezing, pi = amplitude squeezing
    std::optional<double> pump_fraction = 0.5; // pump power as fraction of P_th
    std::optional<double> P_pump;              // absolute pump power (W)
    // input quadrature variances normalized to shot noise
    double V_A1_in = 1.0;
    double V_A2_in = 1.0;
    double V_B1_in = 1.0;
    double V_B2_in = 1.0;

    double na() const { return n_a.value_or(n); }
    double nb() const { return n_b.value_or(n); }
    double omega_carrier_a() const { return 2.0 * constants::pi * constants::c0 / lambda_a; }
    double omega_carrier_b() const { return 2.0 * constants::pi * constants::c0 / lambda_b; }
    // Mode volume of the nonlinear interaction region, V = pi r0^2 z.
    double mode_volume() const { return constants::pi * r0 * r0 * z; }
};

// Round-trip damping rates of both carriers. gamma_tot is constructed as the
// sum of the four channels, so the sum identity holds to the last bit.
struct CarrierRates {
    double in = 0.0;
    double out = 0.0;
    double sc = 0.0;
    double abs = 0.0;
    double tot = 0.0;
};

struct CavityRates {
    double tau_rt = 0.0; // round-trip time (s)
    CarrierRates a;
    CarrierRates b;
};

inline void validate(const OpaParams& p) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw InvariantViolation(msg);
    };
    auto refl = [&](double r, const char* name) {
        check(r >= 0.0 && r <= 1.0, std::string(name) + " must lie in [0,1]");
    };
    refl(p.R_a_in, "R_a_in");
    refl(p.R_a_out, "R_a_out");
    refl(p.R_b_in, "R_b_in");
    refl(p.R_b_out, "R_b_out");
    check(p.sigma_a_abs >= 0.0 && p.sigma_a_sc >= 0.0 && p.sigma_b_abs >= 0.0 && p.sigma_b_sc >= 0.0,
          "loss rates must be >= 0");
    check(p.lambda_a > 0.0 && p.lambda_b > 0.0, "wavelengths must be > 0");
    check(std::abs(p.lambda_b - 0.5 * p.lambda_a) <= 1e-6 * p.lambda_b,
          "lambda_b must equal lambda_a/2 within 1 ppm");
    check(p.z > 0.0, "crystal length z must be > 0");
    check(p.kappa0 >= 0.0, "kappa0 must be >= 0");
    check(p.n > 0.0 && p.na() > 0.0 && p.nb() > 0.0, "refractive indices must be > 0");
    check(p.C > 0.0 && p.rho > 0.0 && p.kappa_th > 0.0 && p.r0 > 0.0,
          "thermal constants must be > 0");
    check(p.xi >= 0.0, "xi must be >= 0");
    check(p.P_seed >= 0.0, "P_seed must be >= 0");
    check(p.pump_fraction.has_value() != p.P_pump.has_value(),
          "exactly one of pump_fraction / P_pump must be set");
    if (p.pump_fraction) check(*p.pump_fraction >= 0.0, "pump_fraction must be >= 0");
    if (p.P_pump) check(*p.P_pump >= 0.0, "P_pump must be >= 0");
    check(p.V_A1_in >= 0.0 && p.V_A2_in >= 0.0 && p.V_B1_in >= 0.0 && p.V_B2_in >= 0.0,
          "input variances must be >= 0");
    check(p.V_A1_in * p.V_A2_in >= 1.0 - 1e-12,
          "seed input violates the minimum-uncertainty bound V1*V2 >= 1");
    check(p.V_B1_in * p.V_B2_in >= 1.0 - 1e-12,
          "pump input violates the minimum-uncertainty bound V1*V2 >= 1");
}

// Rate conversion convention: monolithic crystal cavity, optical round trip
// 2 n z, and gamma = (round-trip power loss) / (2 tau_rt). The crystal is
// traversed twice per round trip, so distributed losses enter as 2 sigma z.
inline CavityRates derive_rates(const OpaParams& p) {
    CavityRates r;
    r.tau_rt = 2.0 * p.n * p.z / constants::c0;
    const double inv2tau = 1.0 / (2.0 * r.tau_rt);
    r.a.in = (1.0 - p.R_a_in) * inv2tau;
    r.a.out = (1.0 - p.R_a_out) * inv2tau;
    r.a.sc = 2.0 * p.sigma_a_sc * p.z * inv2tau;
    r.a.abs = 2.0 * p.sigma_a_abs * p.z * inv2tau;
    r.a.tot = r.a.in + r.a.out + r.a.sc + r.a.abs;
    r.b.in = (1.0 - p.R_b_in) * inv2tau;
    r.b.out = (1.0 - p.R_b_out) * inv2tau;
    r.b.sc = 2.0 * p.sigma_b_sc * p.z * inv2tau;
    r.b.abs = 2.0 * p.sigma_b_abs * p.z * inv2tau;
    r.b.tot = r.b.in + r.b.out + r.b.sc + r.b.abs;
    return r;
}

namespace detail {

struct UnitDef {
    const char* suffix;
    double factor;
};

// Allowed unit suffixes per key family. Bare numbers are taken as canonical SI.
inline double apply_unit(const std::string& key, const std::string& unit, double value) {
    if (unit.empty()) return value;

    static const std::map<std::string, std::vector<UnitDef>> table = {
        {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
        {"fraction", {{"%", 1e-2}}},
        {"loss", {{"1/m", 1.0}, {"%/cm", 1.0}, {"%/m", 1e-2}}},
        {"power", {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}}},
        {"temperature", {{"K", 1.0}, {"mK", 1e-3}}},
        {"density", {{"kg/m3", 1.0}, {"g/cm3", 1e3}}},
        {"angfreq", {{"rad/s", 1.0}, {"Hz", 2.0 * constants::pi}, {"kHz", 2.0e3 * constants::pi},
                     {"MHz", 2.0e6 * constants::pi}}},
        {"angle", {{"rad", 1.0}, {"deg", constants::pi / 180.0}}},
        {"specific_heat", {{"J/kg/K", 1.0}}},
        {"conductivity", {{"W/K/m", 1.0}, {"W/m/K", 1.0}}},
        {"coupling", {{"1/m/s", 1.0}}},
        {"mismatch", {{"1/m/K", 1.0}}},
        {"per_kelvin", {{"1/K", 1.0}}},
        {"none", {}},
    };

    static const std::map<std::string, std::string> key_family = {
        {"lambda_a", "length"},   {"lambda_b", "length"},   {"z", "length"},
        {"r0", "length"},         {"R_a_in", "fraction"},   {"R_a_out", "fraction"},
        {"R_b_in", "fraction"},   {"R_b_out", "fraction"},  {"sigma_a_abs", "loss"},
        {"sigma_a_sc", "loss"},   {"sigma_b_abs", "loss"},  {"sigma_b_sc", "loss"},
        {"kappa0", "coupling"},   {"n", "none"},            {"n_a", "none"},
        {"n_b", "none"},          {"C", "specific_heat"},   {"rho", "density"},
        {"kappa_th", "conductivity"}, {"xi", "mismatch"},   {"alpha_a", "per_kelvin"},
        {"alpha_b", "per_kelvin"},{"dn_a_dT", "per_kelvin"},{"dn_b_dT", "per_kelvin"},
        {"dT_offset", "temperature"}, {"omega_a_det", "angfreq"}, {"omega_b_det", "angfreq"},
        {"P_seed", "power"},      {"P_pump", "power"},      {"phi_a", "angle"},
        {"phi_b", "angle"},       {"pump_fraction", "none"},{"V_A1_in", "none"},
        {"V_A2_in", "none"},      {"V_B1_in", "none"},      {"V_B2_in", "none"},
    };

    auto fam = key_family.find(key);
    if (fam == key_family.end()) throw UnitParseError(key, "unknown key");
    const auto& defs = table.at(fam->second);
    for (const auto& d : defs)
        if (unit == d.suffix) return value * d.factor;
    throw UnitParseError(key, "unsupported unit suffix '" + unit + "'");
}

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_value(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw UnitParseError(key, "empty value");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str()) throw UnitParseError(key, "not a number: '" + t + "'");
    const std::string unit = trim(t.substr(static_cast<size_t>(end - t.c_str())));
    return apply_unit(key, unit, v);
}

} // namespace detail

namespace detail {

// Assigns one parsed value. Returns 1 if the key was pump_fraction, 2 if
// P_pump, 0 otherwise, so callers can track the exclusive pair.
inline int assign_key(OpaParams& p, const std::string& key, double v) {
    if (key == "lambda_a") p.lambda_a = v;
    else if (key == "lambda_b") p.lambda_b = v;
    else if (key == "R_a_in") p.R_a_in = v;
    else if (key == "R_a_out") p.R_a_out = v;
    else if (key == "R_b_in") p.R_b_in = v;
    else if (key == "R_b_out") p.R_b_out = v;
    else if (key == "sigma_a_abs") p.sigma_a_abs = v;
    else if (key == "sigma_a_sc") p.sigma_a_sc = v;
    else if (key == "sigma_b_abs") p.sigma_b_abs = v;
    else if (key == "sigma_b_sc") p.sigma_b_sc = v;
    else if (key == "z") p.z = v;
    else if (key == "kappa0") p.kappa0 = v;
    else if (key == "n") p.n = v;
    else if (key == "n_a") p.n_a = v;
    else if (key == "n_b") p.n_b = v;
    else if (key == "C") p.C = v;
    else if (key == "rho") p.rho = v;
    else if (key == "kappa_th") p.kappa_th = v;
    else if (key == "r0") p.r0 = v;
    else if (key == "xi") p.xi = v;
    else if (key == "alpha_a") p.alpha_a = v;
    else if (key == "alpha_b") p.alpha_b = v;
    else if (key == "dn_a_dT") p.dn_a_dT = v;
    else if (key == "dn_b_dT") p.dn_b_dT = v;
    else if (key == "dT_offset") p.dT_offset = v;
    else if (key == "omega_a_det") p.omega_a_det = v;
    else if (key == "omega_b_det") p.omega_b_det = v;
    else if (key == "P_seed") p.P_seed = v;
    else if (key == "phi_a") p.phi_a = v;
    else if (key == "phi_b") p.phi_b = v;
    else if (key == "pump_fraction") { p.pump_fraction = v; return 1; }
    else if (key == "P_pump") { p.P_pump = v; return 2; }
    else if (key == "V_A1_in") p.V_A1_in = v;
    else if (key == "V_A2_in") p.V_A2_in = v;
    else if (key == "V_B1_in") p.V_B1_in = v;
    else if (key == "V_B2_in") p.V_B2_in = v;
    else throw UnitParseError(key, "unknown key");
    return 0;
}

} // namespace detail

// Single-key override with unit parsing; setting either pump control clears
// the other (they are mutually exclusive).
inline void set_param(OpaParams& p, const std::string& key, const std::string& value_text) {
    const double v = detail::parse_value(key, value_text);
    const int pump = detail::assign_key(p, key, v);
    if (pump == 1) p.P_pump.reset();
    if (pump == 2) p.pump_fraction.reset();
}

// Parse flat `key = value [unit]` text. `#` starts a comment. With defaults
// enabled, keys not present keep their built-in values; otherwise every
// non-optional key must appear. Setting P_pump clears the default
// pump_fraction (and vice versa); setting both explicitly is an
// InvariantViolation.
inline OpaParams load_params(const std::string& config_text, bool use_defaults = true) {
    OpaParams p;
    bool saw_pump_fraction = false;
    bool saw_p_pump = false;
    std::vector<std::string> seen;

    std::istringstream in(config_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UnitParseError("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const double v = detail::parse_value(key, line.substr(eq + 1));
        const int pump = detail::assign_key(p, key, v);
        if (pump == 1) saw_pump_fraction = true;
        if (pump == 2) saw_p_pump = true;
        seen.push_back(key);
    }

    if (saw_pump_fraction && saw_p_pump)
        throw InvariantViolation("config sets both pump_fraction and P_pump");
    if (saw_p_pump) p.pump_fraction.reset();
    if (saw_pump_fraction) p.P_pump.reset();

    if (!use_defaults) {
        static const char* required[] = {
            "lambda_a", "lambda_b", "R_a_in", "R_a_out", "R_b_in", "R_b_out",
            "sigma_a_abs", "sigma_a_sc", "sigma_b_abs", "sigma_b_sc", "z", "kappa0",
            "n", "C", "rho", "kappa_th", "r0", "xi", "alpha_a", "alpha_b",
            "dn_a_dT", "dn_b_dT", "dT_offset", "omega_a_det", "omega_b_det",
            "P_seed", "phi_a", "phi_b", "V_A1_in", "V_A2_in", "V_B1_in", "V_B2_in"};
        for (const char* key : required)
            if (std::find(seen.begin(), seen.end(), key) == seen.end())
                throw MissingKeyError(key);
        if (!saw_pump_fraction && !saw_p_pump)
            throw MissingKeyError("pump_fraction (or P_pump)");
    }

    validate(p);
    return p;
}

// Canonical SI serialization; load_params(serialize(p)) reproduces p exactly.
inline std::string serialize(const OpaParams& p) {
    std::ostringstream out;
    out.precision(17);
    auto w = [&](const char* key, double v) { out << key << " = " << v << "\n"; };
    w("lambda_a", p.lambda_a);
    w("lambda_b", p.lambda_b);
    w("R_a_in", p.R_a_in);
    w("R_a_out", p.R_a_out);
    w("R_b_in", p.R_b_in);
    w("R_b_out", p.R_b_out);
    w("sigma_a_abs", p.sigma_a_abs);
    w("sigma_a_sc", p.sigma_a_sc);
    w("sigma_b_abs", p.sigma_b_abs);
    w("sigma_b_sc", p.sigma_b_sc);
    w("z", p.z);
    w("kappa0", p.kappa0);
    w("n", p.n);
    if (p.n_a) w("n_a", *p.n_a);
    if (p.n_b) w("n_b", *p.n_b);
    w("C", p.C);
    w("rho", p.rho);
    w("kappa_th", p.kappa_th);
    w("r0", p.r0);
    w("xi", p.xi);
    w("alpha_a", p.alpha_a);
    w("alpha_b", p.alpha_b);
    w("dn_a_dT", p.dn_a_dT);
    w("dn_b_dT", p.dn_b_dT);
    w("dT_offset", p.dT_offset);
    w("omega_a_det", p.omega_a_det);
    w("omega_b_det", p.omega_b_det);
    w("P_seed", p.P_seed);
    w("phi_a", p.phi_a);
    w("phi_b", p.phi_b);
    if (p.pump_fraction) w("pump_fraction", *p.pump_fraction);
    if (p.P_pump) w("P_pump", *p.P_pump);
    w("V_A1_in", p.V_A1_in);
    w("V_A2_in", p.V_A2_in);
    w("V_B1_in", p.V_B1_in);
    w("V_B2_in", p.V_B2_in);
    return out.str();
}

} // namespace opasq
