#pragma once

#include <cmath>
#include <optional>

#include "opasq/constants.hpp"
#include "opasq/errors.hpp"

namespace opasq {

// Conventional interferometer parameters for projecting squeezed-light spectra
// onto a strain noise budget. theta unset selects the ideal frequency-dependent
// squeeze angle theta(Omega) = -Phi(Omega).
struct IfoParams {
    double m = 40.0;                        // mirror mass (kg)
    double L = 4000.0;                      // arm length (m)
    double gamma_arm = 2.0 * constants::pi * 100.0; // arm-cavity linewidth (rad/s)
    double power_ratio = 1.0;               // I0 / I_SQL
    std::optional<double> theta = 0.0;      // injected squeeze angle (rad)
    std::optional<double> gamma_f;          // amplitude-filter linewidth (rad/s)
};

inline void validate(const IfoParams& ifo) {
    if (!(ifo.m > 0.0 && ifo.L > 0.0 && ifo.gamma_arm > 0.0 && ifo.power_ratio > 0.0))
        throw InvariantViolation("IFO mass, length, linewidth and power ratio must be > 0");
    if (ifo.gamma_f && !(*ifo.gamma_f > 0.0))
        throw InvariantViolation("filter linewidth must be > 0 when set");
}

// h_SQL(Omega) = sqrt(8 hbar / (m Omega^2 L^2))
inline double h_sql(double omega, double m, double L) {
    if (omega <= 0.0) throw ZeroFrequencyError();
    return std::sqrt(8.0 * constants::hbar / (m * omega * omega * L * L));
}

// eta(Omega) = 2 (I0/I_SQL) gamma^4 / (Omega^2 (gamma^2 + Omega^2))
inline double eta_coupling(double omega, double power_ratio, double gamma_arm) {
    const double g2 = gamma_arm * gamma_arm;
    return 2.0 * power_ratio * g2 * g2 / (omega * omega * (g2 + omega * omega));
}

// Phi(Omega) = acot(eta), in (0, pi/2)
inline double phi_angle(double eta) { return std::atan2(1.0, eta); }

// S(Omega) = (h_SQL^2/2)(1/eta + eta)(V1 cos^2(theta+Phi) + V2 sin^2(theta+Phi)).
// With the frequency-dependent angle the phase quadrature decouples entirely.
inline double gw_noise(double omega, double V1, double V2, const IfoParams& ifo) {
    const double h2 = h_sql(omega, ifo.m, ifo.L);
    const double eta = eta_coupling(omega, ifo.power_ratio, ifo.gamma_arm);
    const double pref = 0.5 * h2 * h2 * (1.0 / eta + eta);
    if (!ifo.theta) return pref * V1;
    const double ang = *ifo.theta + phi_angle(eta);
    const double c = std::cos(ang);
    const double s = std::sin(ang);
    return pref * (V1 * c * c + V2 * s * s);
}

// Amplitude-filter injection: S = (h_SQL^2/(2 eta)) [zeta1 (V1 + eta^2 V2)
// + zeta2 (1 + eta^2)], zeta1 = Omega^2/(gamma_f^2+Omega^2), zeta2 = 1 - zeta1.
// The filter passes the squeezed field above its linewidth and vacuum below.
inline double filtered_noise(double omega, double V1, double V2, const IfoParams& ifo) {
    if (!ifo.gamma_f) throw MissingFilterLinewidthError();
    const double gf2 = *ifo.gamma_f * *ifo.gamma_f;
    const double z1 = omega * omega / (gf2 + omega * omega);
    const double z2 = gf2 / (gf2 + omega * omega);
    const double h2 = h_sql(omega, ifo.m, ifo.L);
    const double eta = eta_coupling(omega, ifo.power_ratio, ifo.gamma_arm);
    return 0.5 * h2 * h2 / eta *
           (z1 * (V1 + eta * eta * V2) + z2 * (1.0 + eta * eta));
}

} // namespace opasq
