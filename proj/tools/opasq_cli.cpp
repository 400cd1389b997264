// Command-line front end: spectra, power sweeps, GW-projection curves, the
// oscillation threshold report, and the time-domain Monte-Carlo cross-check.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opasq/run.hpp"

namespace {

constexpr double pi = opasq::constants::pi;

void add_grid_flags(CLI::App* cmd, opasq::FrequencyGrid& grid) {
    cmd->add_option("--fmin-hz", grid.f_min_hz, "lower grid edge (Hz)");
    cmd->add_option("--fmax-hz", grid.f_max_hz, "upper grid edge (Hz)");
    cmd->add_option("--ppd", grid.points_per_decade, "grid points per decade (>= 10)");
}

void add_common_flags(CLI::App* cmd, opasq::RunRequest& req, std::vector<std::string>& sets,
                      bool need_config = true) {
    auto* opt = cmd->add_option("--config", req.config_path, "parameter file (key = value)");
    if (need_config) opt->required();
    cmd->add_option("-o,--out", req.output_path, "output CSV path");
    cmd->add_option("--set", sets, "override a config key, e.g. --set \"dT_offset=0 K\"");
}

void apply_sets(opasq::RunRequest& req, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw opasq::InvariantViolation("--set expects key=value, got '" + s + "'");
        req.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
}

std::vector<double> scale(std::vector<double> v, double s) {
    for (double& x : v) x *= s;
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-domain squeezed-light noise simulator for a degenerate OPA"};
    app.require_subcommand(1);

    opasq::RunRequest req;
    std::vector<std::string> sets;
    opasq::FrequencyGrid spec_grid{1.0, 1e8, 400};
    opasq::FrequencyGrid gw_grid{10.0, 1e4, 200};

    // ---- spectrum -----------------------------------------------------------
    auto* spectrum = app.add_subcommand("spectrum", "output quadrature variance spectra");
    add_common_flags(spectrum, req, sets);
    add_grid_flags(spectrum, spec_grid);
    std::vector<double> seed_mw, pump_frac, pump_noise;
    std::string pump_phase = "";
    bool phase_squeeze = false, amplitude_squeeze = false;
    spectrum->add_option("--seed-mw", seed_mw, "seed power(s), mW")->delimiter(',');
    spectrum->add_option("--pump-frac", pump_frac, "pump power(s) as fraction of threshold")
        ->delimiter(',');
    spectrum->add_option("--pump-noise", pump_noise, "pump amplitude noise V1_B ladder")
        ->delimiter(',');
    spectrum->add_option("--pump-phase", pump_phase, "pump phase: 0 | pi | both");
    spectrum->add_flag("--phase-squeeze", phase_squeeze, "squeeze the phase quadrature (phi_b = 0)");
    spectrum->add_flag("--amplitude-squeeze", amplitude_squeeze,
                       "squeeze the amplitude quadrature (phi_b = pi)");
    spectrum->add_flag("--no-photothermal", req.no_photothermal,
                       "zero absorption and use the reduced solution");
    spectrum->add_flag("--plot-script", req.emit_plot_script, "also write a gnuplot script");

    // ---- sweep --------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "variance vs pump/seed power at fixed frequencies");
    add_common_flags(sweep, req, sets);
    std::string axis = "pump-frac";
    sweep->add_option("--axis", axis, "pump-frac | pump-w | seed-mw | pump-noise");
    sweep->add_option("--values", req.sweep_values, "sweep values")->delimiter(',')->required();
    std::vector<double> sweep_freqs{1e5};
    sweep->add_option("--freq-hz", sweep_freqs, "probe frequencies (Hz)")->delimiter(',');
    sweep->add_flag("--plot-script", req.emit_plot_script, "also write a gnuplot script");

    // ---- gw -----------------------------------------------------------------
    auto* gw = app.add_subcommand("gw", "project squeezed spectra onto an interferometer");
    add_common_flags(gw, req, sets);
    add_grid_flags(gw, gw_grid);
    std::vector<std::string> schemes{"all"};
    double theta_rad = -pi / 2.0;
    double filter_hz = 400.0;
    std::vector<double> gw_seed_mw, gw_pump_frac;
    std::string gw_pump_phase = "pi";
    gw->add_option("--scheme", schemes,
                   "unsqueezed | fixed | fixed-no-pt | fdep | filter | all")->delimiter(',');
    gw->add_option("--theta-rad", theta_rad, "fixed injected squeeze angle");
    gw->add_option("--filter-hz", filter_hz, "amplitude filter linewidth (Hz)");
    gw->add_option("--ifo-mass-kg", req.ifo.m, "mirror mass");
    gw->add_option("--ifo-length-m", req.ifo.L, "arm length");
    double ifo_gamma_hz = 100.0;
    gw->add_option("--ifo-gamma-hz", ifo_gamma_hz, "arm cavity linewidth (Hz)");
    gw->add_option("--power-ratio", req.ifo.power_ratio, "I0 / I_SQL");
    gw->add_option("--seed-mw", gw_seed_mw, "seed power (mW)")->delimiter(',');
    gw->add_option("--pump-frac", gw_pump_frac, "pump fraction of threshold")->delimiter(',');
    gw->add_option("--pump-phase", gw_pump_phase, "pump phase: 0 | pi");
    gw->add_flag("--plot-script", req.emit_plot_script, "also write a gnuplot script");

    // ---- threshold ----------------------------------------------------------
    auto* threshold = app.add_subcommand("threshold", "oscillation threshold and cavity rates");
    add_common_flags(threshold, req, sets);

    // ---- oracle -------------------------------------------------------------
    auto* oracle = app.add_subcommand("oracle", "time-domain Monte-Carlo variance estimates");
    add_common_flags(oracle, req, sets);
    std::vector<double> probe_hz{50.0, 1000.0, 3e5};
    oracle->add_option("--probe-hz", probe_hz, "probe frequencies (Hz)")->delimiter(',');
    oracle->add_option("--segments", req.oracle.segments, "Welch segments per replica");
    oracle->add_option("--segment-length", req.oracle.segment_length, "Welch segment length");
    oracle->add_option("--replicas", req.oracle.replicas, "independent replicas");
    oracle->add_option("--fs-factor", req.oracle.fs_factor, "sampling rate / probe frequency");
    oracle->add_option("--rng-seed", req.oracle.rng_seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_sets(req, sets);
        if (spectrum->parsed()) {
            req.command = opasq::Command::spectrum;
            req.grid = spec_grid;
            req.seed_watts = scale(seed_mw, 1e-3);
            req.pump_fractions = pump_frac;
            req.pump_noise = pump_noise;
            if (phase_squeeze && amplitude_squeeze) pump_phase = "both";
            else if (phase_squeeze) pump_phase = "0";
            else if (amplitude_squeeze) pump_phase = "pi";
            if (pump_phase == "0") req.pump_phases = {0.0};
            else if (pump_phase == "pi") req.pump_phases = {pi};
            else if (pump_phase == "both") req.pump_phases = {0.0, pi};
            else if (!pump_phase.empty())
                throw opasq::InvariantViolation("--pump-phase must be 0, pi or both");
        } else if (sweep->parsed()) {
            req.command = opasq::Command::sweep;
            req.sweep_freqs_hz = sweep_freqs;
            if (axis == "pump-frac") req.axis = opasq::SweepAxis::pump_fraction;
            else if (axis == "pump-w") req.axis = opasq::SweepAxis::pump_watts;
            else if (axis == "seed-mw") {
                req.axis = opasq::SweepAxis::seed_watts;
                req.sweep_values = scale(req.sweep_values, 1e-3);
            } else if (axis == "pump-noise") req.axis = opasq::SweepAxis::pump_noise;
            else throw opasq::InvariantViolation("unknown sweep axis '" + axis + "'");
        } else if (gw->parsed()) {
            req.command = opasq::Command::gw;
            req.grid = gw_grid;
            req.ifo.gamma_arm = 2.0 * pi * ifo_gamma_hz;
            req.ifo.theta = theta_rad;
            req.ifo.gamma_f = 2.0 * pi * filter_hz;
            if (!gw_seed_mw.empty())
                req.overrides.emplace_back("P_seed", opasq::detail::fmt(gw_seed_mw[0] * 1e-3));
            if (!gw_pump_frac.empty())
                req.overrides.emplace_back("pump_fraction", opasq::detail::fmt(gw_pump_frac[0]));
            req.overrides.emplace_back("phi_b", gw_pump_phase == "pi" ? "3.14159265358979324" : "0");
            using Kind = opasq::GwCurve::Kind;
            for (const auto& s : schemes) {
                if (s == "all") {
                    req.gw_curves.push_back({Kind::unsqueezed, true, "unsqueezed"});
                    req.gw_curves.push_back({Kind::fixed_angle, false, "fixed-no-photothermal"});
                    req.gw_curves.push_back({Kind::frequency_dependent, true, "frequency-dependent"});
                    req.gw_curves.push_back({Kind::fixed_angle, true, "fixed"});
                    req.gw_curves.push_back({Kind::amplitude_filter, true, "amplitude-filter"});
                } else if (s == "unsqueezed")
                    req.gw_curves.push_back({Kind::unsqueezed, true, "unsqueezed"});
                else if (s == "fixed")
                    req.gw_curves.push_back({Kind::fixed_angle, true, "fixed"});
                else if (s == "fixed-no-pt")
                    req.gw_curves.push_back({Kind::fixed_angle, false, "fixed-no-photothermal"});
                else if (s == "fdep")
                    req.gw_curves.push_back({Kind::frequency_dependent, true, "frequency-dependent"});
                else if (s == "filter")
                    req.gw_curves.push_back({Kind::amplitude_filter, true, "amplitude-filter"});
                else
                    throw opasq::InvariantViolation("unknown gw scheme '" + s + "'");
            }
        } else if (threshold->parsed()) {
            req.command = opasq::Command::threshold;
        } else if (oracle->parsed()) {
            req.command = opasq::Command::oracle;
            req.probe_freqs_hz = probe_hz;
        }

        opasq::run(req);
    } catch (const opasq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
