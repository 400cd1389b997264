#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "opasq/config.hpp"
#include "opasq/crystal.hpp"
#include "opasq/dynamics.hpp"
#include "opasq/errors.hpp"
#include "opasq/steady_state.hpp"

namespace opasq {

struct SpectrumPoint {
    double omega = 0.0; // sideband angular frequency (rad/s)
    double V1 = 1.0;    // normalized amplitude quadrature variance
    double V2 = 1.0;    // normalized phase quadrature variance
};

// Everything derived from one parameter set, assembled once per run.
struct OpaModel {
    OpaParams params;
    CavityRates rates;
    CouplingState coupling;
    SteadyState steady;
    ThermalCoeffs thermal;
    SystemMatrices matrices;
};

inline OpaModel build_model(const OpaParams& p) {
    OpaModel m;
    m.params = p;
    validate(p);
    m.rates = derive_rates(p);
    m.coupling = coupling_state(p);
    m.steady = operating_point(p, m.rates, m.coupling);
    m.thermal = photothermal_coeffs(p, m.rates, m.steady, m.coupling);
    m.matrices = build_system_matrices(m.steady, m.coupling, m.rates, p.omega_a_det,
                                       p.omega_b_det);
    return m;
}

// Which pieces of the photothermal machinery participate in a sweep.
//   full         - photothermal matrices included (the default model)
//   coupling_off - photothermal matrices zeroed but absorption kept as a loss;
//                  isolates the photothermal contribution at fixed cavity rates
//   reduced      - the printed photothermal-off solution (drops the absorption
//                  vacuum channel; coincides with full when gamma_abs = 0)
enum class PhotothermalMode { full, coupling_off, reduced };

inline ThetaSet theta_at(const OpaModel& m, double omega,
                         PhotothermalMode mode = PhotothermalMode::full) {
    switch (mode) {
    case PhotothermalMode::full: {
        const PhotothermalMatrices pm =
            build_photothermal_matrices(omega, m.steady, m.thermal, m.rates);
        return transfer_matrices(omega, m.matrices, pm);
    }
    case PhotothermalMode::coupling_off: {
        const PhotothermalMatrices pm{}; // zero matrices
        return transfer_matrices(omega, m.matrices, pm);
    }
    case PhotothermalMode::reduced:
    default:
        return transfer_matrices_reduced(omega, m.matrices);
    }
}

// V_i = sum_j |Theta_in(i,j)|^2 v_in(j) + sum_j (|Theta_out|^2 + |Theta_sc|^2
// + |Theta_abs|^2)(i,j); the vacuum ports are minimum-uncertainty (unit) inputs.
inline std::array<double, 2> output_variances(const ThetaSet& ts,
                                              const std::array<double, 4>& input_variances) {
    std::array<double, 2> v{0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) {
            s += std::norm(ts.in(i, j)) * input_variances[static_cast<size_t>(j)];
            s += std::norm(ts.out(i, j)) + std::norm(ts.sc(i, j)) + std::norm(ts.abs(i, j));
        }
        v[static_cast<size_t>(i)] = s;
    }
    return v;
}

inline std::array<double, 4> input_variances(const OpaParams& p) {
    return {p.V_A1_in, p.V_A2_in, p.V_B1_in, p.V_B2_in};
}

inline std::vector<SpectrumPoint> spectrum(const OpaModel& m, const std::vector<double>& omegas,
                                           PhotothermalMode mode = PhotothermalMode::full) {
    const auto vin = input_variances(m.params);
    std::vector<SpectrumPoint> out;
    out.reserve(omegas.size());
    for (double w : omegas) {
        const auto v = output_variances(theta_at(m, w, mode), vin);
        out.push_back({w, v[0], v[1]});
    }
    return out;
}

inline std::vector<SpectrumPoint> spectrum(const OpaParams& p, const std::vector<double>& omegas,
                                           PhotothermalMode mode = PhotothermalMode::full) {
    return spectrum(build_model(p), omegas, mode);
}

// Logarithmic frequency grid; frequencies in Hz, omegas in rad/s.
struct FrequencyGrid {
    double f_min_hz = 1.0;
    double f_max_hz = 1e8;
    int points_per_decade = 400;

    std::vector<double> omegas() const {
        if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz))
            throw InvariantViolation("frequency grid requires 0 < f_min < f_max");
        if (points_per_decade < 10)
            throw InvariantViolation("frequency grid requires >= 10 points/decade");
        const double decades = std::log10(f_max_hz / f_min_hz);
        const int n = static_cast<int>(std::floor(decades * points_per_decade)) + 1;
        std::vector<double> w;
        w.reserve(static_cast<size_t>(n) + 1);
        for (int k = 0; k < n; ++k)
            w.push_back(2.0 * constants::pi * f_min_hz *
                        std::pow(10.0, static_cast<double>(k) / points_per_decade));
        // keep the stated upper edge on the grid
        const double w_max = 2.0 * constants::pi * f_max_hz;
        if (w.back() < w_max * (1.0 - 1e-12)) w.push_back(w_max);
        return w;
    }
};

namespace detail {

// Light log-domain smoothing; the model curves are noiseless, so this only
// guards the knee search against isolated grid artifacts.
inline std::vector<double> smooth_log(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<double> lg(n), out(n);
    for (size_t i = 0; i < n; ++i) lg[i] = std::log(v[i]);
    for (size_t i = 0; i < n; ++i) {
        if (i == 0 || i + 1 == n) out[i] = lg[i];
        else out[i] = (lg[i - 1] + lg[i] + lg[i + 1]) / 3.0;
    }
    return out;
}

} // namespace detail

// Photothermal knee: the frequency at which the chosen variance exceeds its
// mid-band plateau by 3 dB. The plateau is located as the flattest half-decade
// window of the curve, ties resolved toward the smallest variance (the flat
// band below the thermal cutoff sits well above the plateau for any curve that
// has a knee at all).
inline double cutoff_estimate(const std::vector<SpectrumPoint>& spec, int quadrature) {
    if (quadrature != 1 && quadrature != 2)
        throw InvariantViolation("quadrature selector must be 1 or 2");
    const size_t n = spec.size();
    if (n < 16) throw NoCutoffFoundError("spectrum too short to locate a plateau");

    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i)
        v[i] = quadrature == 1 ? spec[i].V1 : spec[i].V2;
    const auto lv = detail::smooth_log(v);

    // half-decade window in index space (grid assumed log-spaced)
    const double decades = std::log10(spec[n - 1].omega / spec[0].omega);
    const size_t half_window =
        std::max<size_t>(2, static_cast<size_t>(0.25 * static_cast<double>(n - 1) / decades));

    std::vector<double> tv(n, 0.0);
    double tv_min = std::numeric_limits<double>::infinity();
    for (size_t i = half_window; i + half_window < n; ++i) {
        double s = 0.0;
        for (size_t k = i - half_window; k < i + half_window; ++k)
            s += std::abs(lv[k + 1] - lv[k]);
        tv[i] = s;
        tv_min = std::min(tv_min, s);
    }

    // Candidate flat windows: anything within 2% total variation over the
    // half decade (or twice the flattest seen) counts as flat. Both the
    // mid-band plateau and the region below the thermal cutoff qualify; the
    // min-variance tie-break picks the mid band whenever a knee exists.
    const double tv_cut = std::max(tv_min * 2.0, 0.02);
    size_t plateau_idx = 0;
    double plateau_val = std::numeric_limits<double>::infinity();
    for (size_t i = half_window; i + half_window < n; ++i) {
        if (tv[i] <= tv_cut && v[i] < plateau_val) {
            plateau_val = v[i];
            plateau_idx = i;
        }
    }
    if (!std::isfinite(plateau_val)) throw NoCutoffFoundError("no flat plateau found");

    const double knee_level = plateau_val * std::pow(10.0, 0.3);

    // scan downward in frequency from the plateau for the 3 dB crossing
    for (size_t i = plateau_idx; i-- > 0;) {
        const double vi = std::exp(lv[i]);
        if (vi >= knee_level) {
            const double v_hi = std::exp(lv[i + 1]);
            const double t = (std::log(knee_level) - std::log(v_hi)) /
                             (std::log(vi) - std::log(v_hi));
            const double lw = std::log(spec[i + 1].omega) +
                              t * (std::log(spec[i].omega) - std::log(spec[i + 1].omega));
            return std::exp(lw);
        }
    }
    throw NoCutoffFoundError("variance never exceeds the plateau by 3 dB");
}

} // namespace opasq
