#pragma once

#include <cmath>
#include <complex>

#include "opasq/config.hpp"
#include "opasq/constants.hpp"
#include "opasq/errors.hpp"

namespace opasq {

// Nonlinear coupling strength and its derivatives at the operating point.
struct CouplingState {
    double delta_k = 0.0;     // phase mismatch (1/m)
    cplx eps_bar;             // coupling strength (1/s)
    cplx d_eps_d_dk;          // d eps / d delta_k (m/s units folded: (1/s)/(1/m))
    cplx d_eps_dz;            // d eps / d z (1/(m*s))
};

// Photothermal coupling coefficients; everything downstream of the thermal
// low-pass is parameterized by these.
struct ThermalCoeffs {
    double omega_T = 0.0;     // thermal cutoff (rad/s)
    double H_T_scale = 0.0;   // 1/(C rho V) (K/J)
    cplx g_eps;               // d eps / dT bracket: (d eps/d dk) xi + (d eps/dz) alpha z
    cplx C_a;                 // delta-eps per absorbed amplitude quadrature, carrier a
    cplx C_b;
    double Pi_a = 0.0;        // absorbed-power-to-temperature drive coefficients
    double Pi_b = 0.0;
    double K_a = 0.0;         // temperature-to-detuning coefficients (rad/(s*K))
    double K_b = 0.0;
};

inline double phase_mismatch(double dT_offset, double xi) { return xi * dT_offset; }

inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// eps = kappa0 z e^{i dk z/2} sinc(dk z/2)
inline cplx coupling_strength(double delta_k, double z, double kappa0) {
    const double x = 0.5 * delta_k * z;
    return kappa0 * z * std::exp(iu * x) * sinc(x);
}

// Closed-form derivatives of the coupling strength. Below |dk z/2| = 1e-4 the
// cot/1/dk combination cancels catastrophically, so a series branch takes over:
//   d eps/d dk -> eps (i z/2 - dk z^2/12 - ...)
//   d eps/d z  -> eps (i dk/2 + 1/z - dk^2 z/12 - ...)
// At dk z/2 = k pi (k != 0) the eps-factored forms are 0*inf; flagged rather
// than evaluated.
inline void coupling_derivatives(double delta_k, double z, double kappa0,
                                 cplx& d_eps_d_dk, cplx& d_eps_dz) {
    const double x = 0.5 * delta_k * z;
    const cplx eps = coupling_strength(delta_k, z, kappa0);

    const double x_mod_pi = std::abs(x - constants::pi * std::round(x / constants::pi));
    if (std::abs(x) > 0.5 && x_mod_pi < 1e-9)
        throw SingularInputError("dk*z/2 at a nonzero multiple of pi (sinc zero, cot pole)");

    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        d_eps_d_dk = eps * cplx(-delta_k * z * z / 12.0 * (1.0 + x2 / 15.0), 0.5 * z);
        d_eps_dz = eps * cplx(1.0 / z - delta_k * delta_k * z / 12.0 * (1.0 + x2 / 15.0),
                              0.5 * delta_k);
        return;
    }
    const double cot = std::cos(x) / std::sin(x);
    d_eps_d_dk = eps * (iu * (0.5 * z) - 1.0 / delta_k + 0.5 * z * cot);
    d_eps_dz = eps * (0.5 * delta_k) * (iu + cot);
}

inline CouplingState coupling_state(const OpaParams& p) {
    CouplingState cs;
    cs.delta_k = phase_mismatch(p.dT_offset, p.xi);
    cs.eps_bar = coupling_strength(cs.delta_k, p.z, p.kappa0);
    coupling_derivatives(cs.delta_k, p.z, p.kappa0, cs.d_eps_d_dk, cs.d_eps_dz);
    return cs;
}

// omega_T = kappa / (C rho r0^2): adiabatic limit of the heated mode volume.
inline double thermal_cutoff(const OpaParams& p) {
    return p.kappa_th / (p.C * p.rho * p.r0 * p.r0);
}

// One-pole response of temperature to absorbed power, H_T = 1/((i Omega + Omega_T) C rho V).
inline cplx thermal_response(double omega, double omega_T, double C, double rho, double V) {
    return 1.0 / ((iu * omega + omega_T) * C * rho * V);
}

} // namespace opasq
