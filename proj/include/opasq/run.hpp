#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opasq/config.hpp"
#include "opasq/gw.hpp"
#include "opasq/oracle.hpp"
#include "opasq/spectra.hpp"

namespace opasq {

inline constexpr const char* version_string = "opasq 0.1.0";

enum class Command { spectrum, sweep, gw, threshold, oracle };

enum class SweepAxis { pump_fraction, pump_watts, seed_watts, pump_noise };

// One GW injection curve. `photothermal` toggles the photothermal coupling in
// the squeezer model feeding the curve (losses stay fixed either way).
struct GwCurve {
    enum class Kind { unsqueezed, fixed_angle, frequency_dependent, amplitude_filter };
    Kind kind = Kind::unsqueezed;
    bool photothermal = true;
    std::string label;
};

struct RunRequest {
    Command command = Command::spectrum;
    std::string config_path;          // read unless config_text nonempty
    std::string config_text;
    std::string output_path;          // CSV target ('' = stdout, threshold only)
    FrequencyGrid grid{1.0, 1e8, 400};
    std::vector<std::pair<std::string, std::string>> overrides; // key, value text

    // spectrum: at most one of these may hold several values; extras label rows
    std::vector<double> pump_fractions;
    std::vector<double> seed_watts;
    std::vector<double> pump_noise;   // V_B1_in ladder
    std::vector<double> pump_phases;  // phi_b values (rad)
    bool no_photothermal = false;     // zero absorption + reduced solution

    // sweep
    SweepAxis axis = SweepAxis::pump_watts;
    std::vector<double> sweep_values;
    std::vector<double> sweep_freqs_hz{1e5};

    // gw
    IfoParams ifo;
    std::vector<GwCurve> gw_curves;

    // oracle
    std::vector<double> probe_freqs_hz;
    OracleOptions oracle;

    bool emit_plot_script = false;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double db10(double v) { return 10.0 * std::log10(v); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot write '" + path + "'");
    out << content;
}

inline nlohmann::ordered_json params_json(const OpaParams& p) {
    nlohmann::ordered_json j;
    std::istringstream in(serialize(p));
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        j[key] = std::strtod(line.c_str() + eq + 1, nullptr);
    }
    return j;
}

inline void write_metadata(const RunRequest& req, const OpaParams& p,
                           const std::string& command_name) {
    if (req.output_path.empty()) return;
    nlohmann::ordered_json j;
    j["version"] = version_string;
    j["command"] = command_name;
    j["output"] = req.output_path;
    j["grid"] = {{"f_min_hz", req.grid.f_min_hz},
                 {"f_max_hz", req.grid.f_max_hz},
                 {"points_per_decade", req.grid.points_per_decade}};
    j["params"] = params_json(p);
    if (req.command == Command::oracle) {
        j["oracle"] = {{"segments", req.oracle.segments},
                       {"segment_length", req.oracle.segment_length},
                       {"replicas", req.oracle.replicas},
                       {"fs_factor", req.oracle.fs_factor},
                       {"rng_seed", req.oracle.rng_seed}};
    }
    write_file(req.output_path + ".meta.json", j.dump(2) + "\n");
}

inline void write_plot_script(const RunRequest& req, const std::string& ylabel) {
    if (!req.emit_plot_script || req.output_path.empty()) return;
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set logscale x\n"
       << "set xlabel 'frequency (Hz)'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "set key autotitle columnhead\n"
       << "plot '" << req.output_path << "' using 1:2 with lines, '' using 1:3 with lines\n";
    write_file(req.output_path + ".gp", gp.str());
}

} // namespace detail

inline OpaParams resolve_params(const RunRequest& req) {
    const std::string text =
        !req.config_text.empty() ? req.config_text
        : (!req.config_path.empty() ? detail::read_file(req.config_path) : std::string());
    OpaParams p = load_params(text);
    for (const auto& [key, value] : req.overrides) set_param(p, key, value);
    validate(p);
    return p;
}

namespace detail {

struct LabeledParams {
    OpaParams p;
    std::string label;
};

inline std::vector<LabeledParams> spectrum_variants(const RunRequest& req, const OpaParams& base) {
    int multi = 0;
    if (req.pump_fractions.size() > 1) ++multi;
    if (req.seed_watts.size() > 1) ++multi;
    if (req.pump_noise.size() > 1) ++multi;
    if (req.pump_phases.size() > 1) ++multi;
    if (multi > 1)
        throw InvariantViolation("only one spectrum parameter may take multiple values");

    std::vector<LabeledParams> out{{base, ""}};
    auto expand = [&out](const std::vector<double>& values, auto apply, auto label) {
        if (values.empty()) return;
        std::vector<LabeledParams> next;
        for (const auto& lp : out)
            for (double v : values) {
                LabeledParams n = lp;
                apply(n.p, v);
                if (values.size() > 1) n.label = label(v);
                next.push_back(n);
            }
        out = next;
    };
    expand(req.pump_fractions,
           [](OpaParams& p, double v) { p.pump_fraction = v; p.P_pump.reset(); },
           [](double v) { return "pump_frac=" + fmt(v); });
    expand(req.seed_watts, [](OpaParams& p, double v) { p.P_seed = v; },
           [](double v) { return "seed_w=" + fmt(v); });
    expand(req.pump_noise, [](OpaParams& p, double v) { p.V_B1_in = v; },
           [](double v) { return "V_B1=" + fmt(v); });
    expand(req.pump_phases, [](OpaParams& p, double v) { p.phi_b = v; },
           [](double v) { return "phi_b=" + fmt(v); });
    return out;
}

} // namespace detail

inline void run_spectrum(const RunRequest& req, std::ostream& os) {
    const OpaParams base = resolve_params(req);
    auto variants = detail::spectrum_variants(req, base);
    const bool labeled = variants.size() > 1;
    const auto omegas = req.grid.omegas();

    os << "freq_hz,V1_dB,V2_dB" << (labeled ? ",label" : "") << "\n";
    for (const auto& variant : variants) {
        OpaParams p = variant.p;
        PhotothermalMode mode = PhotothermalMode::full;
        if (req.no_photothermal) {
            p.sigma_a_abs = 0.0;
            p.sigma_b_abs = 0.0;
            mode = PhotothermalMode::reduced;
        }
        const auto spec = spectrum(p, omegas, mode);
        for (const auto& pt : spec) {
            os << detail::fmt(pt.omega / (2.0 * constants::pi)) << ','
               << detail::fmt(detail::db10(pt.V1)) << ',' << detail::fmt(detail::db10(pt.V2));
            if (labeled) os << ',' << variant.label;
            os << "\n";
        }
    }
}

inline void run_sweep(const RunRequest& req, std::ostream& os) {
    const OpaParams base = resolve_params(req);
    if (req.sweep_values.empty()) throw InvariantViolation("sweep requires a nonempty value list");
    if (req.sweep_freqs_hz.empty()) throw InvariantViolation("sweep requires probe frequencies");

    const char* axis_name = nullptr;
    switch (req.axis) {
    case SweepAxis::pump_fraction:
    case SweepAxis::pump_watts: axis_name = "pump_watts"; break;
    case SweepAxis::seed_watts: axis_name = "seed_watts"; break;
    case SweepAxis::pump_noise: axis_name = "pump_noise_v1"; break;
    }
    const bool labeled = req.sweep_freqs_hz.size() > 1;
    os << axis_name << ",V1_dB,V2_dB" << (labeled ? ",label" : "") << "\n";

    for (double value : req.sweep_values) {
        OpaParams p = base;
        switch (req.axis) {
        case SweepAxis::pump_fraction: p.pump_fraction = value; p.P_pump.reset(); break;
        case SweepAxis::pump_watts: p.P_pump = value; p.pump_fraction.reset(); break;
        case SweepAxis::seed_watts: p.P_seed = value; break;
        case SweepAxis::pump_noise: p.V_B1_in = value; break;
        }
        const OpaModel model = build_model(p);
        double axis_out = value;
        if (req.axis == SweepAxis::pump_fraction) axis_out = value * model.steady.P_th;
        for (double f : req.sweep_freqs_hz) {
            const auto v = output_variances(theta_at(model, 2.0 * constants::pi * f),
                                            input_variances(p));
            os << detail::fmt(axis_out) << ',' << detail::fmt(detail::db10(v[0])) << ','
               << detail::fmt(detail::db10(v[1]));
            if (labeled) os << ",f_hz=" << detail::fmt(f);
            os << "\n";
        }
    }
}

inline void run_gw(const RunRequest& req, std::ostream& os) {
    const OpaParams p = resolve_params(req);
    validate(req.ifo);
    std::vector<GwCurve> curves = req.gw_curves;
    if (curves.empty())
        curves.push_back({GwCurve::Kind::unsqueezed, true, "unsqueezed"});

    const OpaModel model = build_model(p);
    const auto omegas = req.grid.omegas();
    const auto vin = input_variances(p);

    os << "freq_hz,S_over_hsql2_dB,scheme\n";
    for (const auto& curve : curves) {
        const PhotothermalMode mode =
            curve.photothermal ? PhotothermalMode::full : PhotothermalMode::coupling_off;
        for (double w : omegas) {
            double V1 = 1.0, V2 = 1.0;
            if (curve.kind != GwCurve::Kind::unsqueezed) {
                const auto v = output_variances(theta_at(model, w, mode), vin);
                V1 = v[0];
                V2 = v[1];
            }
            IfoParams ifo = req.ifo;
            double S = 0.0;
            switch (curve.kind) {
            case GwCurve::Kind::unsqueezed:
                ifo.theta = 0.0;
                S = gw_noise(w, 1.0, 1.0, ifo);
                break;
            case GwCurve::Kind::fixed_angle:
                S = gw_noise(w, V1, V2, ifo);
                break;
            case GwCurve::Kind::frequency_dependent:
                ifo.theta.reset();
                S = gw_noise(w, V1, V2, ifo);
                break;
            case GwCurve::Kind::amplitude_filter:
                S = filtered_noise(w, V1, V2, ifo);
                break;
            }
            const double h = h_sql(w, req.ifo.m, req.ifo.L);
            os << detail::fmt(w / (2.0 * constants::pi)) << ','
               << detail::fmt(detail::db10(S / (h * h))) << ',' << curve.label << "\n";
        }
    }
}

inline void run_threshold(const RunRequest& req, std::ostream& os) {
    const OpaParams p = resolve_params(req);
    const OpaModel m = build_model(p);
    os << "P_th_watts = " << detail::fmt(m.steady.P_th) << "\n"
       << "eps_bar_mag_1_per_s = " << detail::fmt(std::abs(m.coupling.eps_bar)) << "\n"
       << "eps_bar_phase_rad = " << detail::fmt(std::arg(m.coupling.eps_bar)) << "\n"
       << "tau_rt_s = " << detail::fmt(m.rates.tau_rt) << "\n"
       << "gamma_a_in = " << detail::fmt(m.rates.a.in) << "\n"
       << "gamma_a_out = " << detail::fmt(m.rates.a.out) << "\n"
       << "gamma_a_sc = " << detail::fmt(m.rates.a.sc) << "\n"
       << "gamma_a_abs = " << detail::fmt(m.rates.a.abs) << "\n"
       << "gamma_a_tot = " << detail::fmt(m.rates.a.tot) << "\n"
       << "gamma_b_in = " << detail::fmt(m.rates.b.in) << "\n"
       << "gamma_b_out = " << detail::fmt(m.rates.b.out) << "\n"
       << "gamma_b_sc = " << detail::fmt(m.rates.b.sc) << "\n"
       << "gamma_b_abs = " << detail::fmt(m.rates.b.abs) << "\n"
       << "gamma_b_tot = " << detail::fmt(m.rates.b.tot) << "\n"
       << "omega_T_rad_per_s = " << detail::fmt(m.thermal.omega_T) << "\n"
       << "gain = " << detail::fmt(m.steady.gain) << "\n";
}

inline void run_oracle(const RunRequest& req, std::ostream& os) {
    const OpaParams p = resolve_params(req);
    if (req.probe_freqs_hz.empty())
        throw InvariantViolation("oracle requires probe frequencies");
    const OpaModel model = build_model(p);
    std::vector<double> probes;
    for (double f : req.probe_freqs_hz) probes.push_back(2.0 * constants::pi * f);
    const auto est = sde_oracle(model, probes, req.oracle);

    os << "freq_hz,V1_mc,V1_mc_err,V2_mc,V2_mc_err,V1_model,V2_model\n";
    for (const auto& e : est) {
        const auto v = output_variances(theta_at(model, e.omega), input_variances(p));
        os << detail::fmt(e.omega / (2.0 * constants::pi)) << ',' << detail::fmt(e.V1) << ','
           << detail::fmt(e.V1_err) << ',' << detail::fmt(e.V2) << ',' << detail::fmt(e.V2_err)
           << ',' << detail::fmt(v[0]) << ',' << detail::fmt(v[1]) << "\n";
    }
}

// Dispatch a request; writes the CSV (or threshold report) and the metadata
// sidecar. Deterministic: same request and seed give byte-identical files.
inline void run(const RunRequest& req) {
    std::ostringstream body;
    std::string command_name;
    switch (req.command) {
    case Command::spectrum: command_name = "spectrum"; run_spectrum(req, body); break;
    case Command::sweep: command_name = "sweep"; run_sweep(req, body); break;
    case Command::gw: command_name = "gw"; run_gw(req, body); break;
    case Command::threshold: command_name = "threshold"; run_threshold(req, body); break;
    case Command::oracle: command_name = "oracle"; run_oracle(req, body); break;
    }
    if (req.output_path.empty()) {
        std::fputs(body.str().c_str(), stdout);
        return;
    }
    detail::write_file(req.output_path, body.str());
    detail::write_metadata(req, resolve_params(req), command_name);
    detail::write_plot_script(req, req.command == Command::gw
                                       ? "S / h_SQL^2 (dB)"
                                       : "variance (dB rel. shot noise)");
}

} // namespace opasq
