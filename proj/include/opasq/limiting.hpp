#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "opasq/config.hpp"
#include "opasq/crystal.hpp"
#include "opasq/dynamics.hpp"
#include "opasq/errors.hpp"
#include "opasq/steady_state.hpp"

namespace opasq {

// Analytic approximation of Theta rows 1-2, valid for a weakly seeded,
// on-resonance, scatter-free cavity probed well inside its linewidth with the
// pump phase at 0 or pi. The seed-column entries are the static parametric
// input-output relations; the pump-column entries carry the photothermal
// 1/(Omega - i Omega_T) response; all other entries vanish at this order.
// Rows 3-4 of the returned set are zero and not part of the approximation.
inline ThetaSet limiting_theta(double omega, const OpaParams& p, const CavityRates& rates,
                               const SteadyState& ss, const CouplingState& cs,
                               const ThermalCoeffs& tc) {
    std::vector<std::string> failed;
    const double amp_ratio =
        std::abs(ss.b_bar) > 0.0 ? std::abs(ss.a_bar) / std::abs(ss.b_bar) : 0.0;
    if (std::abs(ss.b_bar) > 0.0 && amp_ratio >= 0.1)
        failed.push_back("|a|/|b| = " + std::to_string(amp_ratio) + " (needs < 0.1)");
    if (p.omega_a_det != 0.0 || p.omega_b_det != 0.0)
        failed.push_back("mean detunings must be zero");
    if (p.sigma_a_sc != 0.0 || p.sigma_b_sc != 0.0)
        failed.push_back("intra-cavity scattering must be zero");
    if (!(omega < rates.a.tot)) failed.push_back("Omega must be below the cavity linewidth");
    const double phase_mod =
        std::remainder(p.phi_b, constants::pi);
    if (std::abs(phase_mod) > 1e-9) failed.push_back("phi_b must be 0 or pi");
    if (!failed.empty()) throw AssumptionViolated(failed);

    const cplx e = cs.eps_bar;
    const cplx ec = std::conj(e);
    const cplx a = ss.a_bar;
    const cplx b = ss.b_bar;
    const cplx eb_sum = e * std::conj(b) + ec * b;   // eps b* + eps* b
    const cplx eb_dif = ec * b - e * std::conj(b);   // eps* b - eps b*
    const double ga = rates.a.tot;
    const double gb = rates.b.tot;
    const double D = ga * ga - std::norm(e) * std::norm(b);
    const cplx lp = 1.0 / (omega - iu * tc.omega_T);

    const cplx Cb = tc.C_b;
    const cplx Cbc = std::conj(Cb);
    const cplx abC = a * std::conj(b) * Cb;
    const cplx abCc = std::conj(a) * b * Cbc;
    // the two pump-column brackets
    const cplx br_amp = abC * (ga + ec * b) + abCc * (ga + e * std::conj(b));
    const cplx br_ph = abC * (ga - ec * b) - abCc * (ga - e * std::conj(b));

    const double s_in = std::sqrt(rates.a.in * rates.a.out);
    const double s_abs = std::sqrt(rates.a.abs * rates.a.out);
    const double root2 = std::sqrt(2.0);

    ThetaSet t;
    // amplitude row
    t.in(0, 0) = s_in * (2.0 * ga + eb_sum) / D;
    t.in(0, 1) = iu * s_in * eb_dif / D;
    t.in(0, 2) = -lp * 2.0 * root2 * iu *
                 std::sqrt(rates.a.out * rates.b.abs * rates.b.in) * br_amp / (gb * D);
    t.out(0, 0) = (-ga * ga + 2.0 * rates.a.out * ga + rates.a.out * eb_sum +
                   std::norm(e) * std::norm(b)) / D;
    t.out(0, 1) = iu * rates.a.out * eb_dif / D;
    t.out(0, 2) = -lp * 2.0 * root2 * iu *
                  std::sqrt(rates.a.out * rates.b.abs * rates.b.out) * br_amp / (gb * D);
    t.abs(0, 0) = s_abs * (2.0 * ga + eb_sum) / D;
    t.abs(0, 1) = iu * s_abs * eb_dif / D;
    t.abs(0, 2) = -lp * iu * std::sqrt(2.0 * rates.a.out) * (2.0 * rates.b.abs - gb) * br_amp /
                  (gb * D);
    // phase row
    t.in(1, 0) = iu * s_in * eb_dif / D;
    t.in(1, 1) = s_in * (2.0 * ga - eb_sum) / D;
    t.in(1, 2) = -lp * 2.0 * root2 *
                 std::sqrt(rates.a.out * rates.b.abs * rates.b.in) * br_ph / (gb * D);
    t.out(1, 0) = iu * rates.a.out * eb_dif / D;
    t.out(1, 1) = (-ga * ga + 2.0 * rates.a.out * ga - rates.a.out * eb_sum +
                   std::norm(e) * std::norm(b)) / D;
    t.out(1, 2) = -lp * 2.0 * root2 *
                  std::sqrt(rates.a.out * rates.b.abs * rates.b.out) * br_ph / (gb * D);
    t.abs(1, 0) = iu * s_abs * eb_dif / D;
    t.abs(1, 1) = s_abs * (2.0 * ga - eb_sum) / D;
    t.abs(1, 2) = -lp * std::sqrt(2.0 * rates.a.out) * (2.0 * rates.b.abs - gb) * br_ph /
                  (gb * D);
    // t.sc stays zero; (i,3) entries stay zero
    return t;
}

} // namespace opasq
