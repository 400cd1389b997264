#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "opasq/config.hpp"
#include "opasq/crystal.hpp"
#include "opasq/errors.hpp"
#include "opasq/mat4.hpp"
#include "opasq/steady_state.hpp"

namespace opasq {

// Frequency-independent coupling matrices of the linearized equations of
// motion, in the (da, da+, db, db+) basis.
struct SystemMatrices {
    Mat4 M_c;
    Mat4 M_in;
    Mat4 M_out;
    Mat4 M_sc;
    Mat4 M_abs;
};

// Frequency-dependent photothermal coupling matrices. All four share the
// 1/(i Omega + Omega_T) thermal low-pass prefactor and a rank-1 structure:
// a response column (how delta-T pushes the fields) times a drive row (how the
// fields and absorption vacua heat the crystal).
struct PhotothermalMatrices {
    Mat4 M_eps_c;
    Mat4 M_eps_abs;
    Mat4 M_omega_c;
    Mat4 M_omega_abs;
};

// Extra-cavity quadrature transfer matrices at one sideband frequency.
struct ThetaSet {
    Mat4 in;
    Mat4 out;
    Mat4 sc;
    Mat4 abs;
};

inline Mat4 lambda_matrix() {
    Mat4 L;
    L(0, 0) = 1.0; L(0, 1) = 1.0;
    L(1, 0) = iu;  L(1, 1) = -iu;
    L(2, 2) = 1.0; L(2, 3) = 1.0;
    L(3, 2) = iu;  L(3, 3) = -iu;
    return L;
}

inline Mat4 lambda_inverse() {
    Mat4 L;
    L(0, 0) = 0.5; L(0, 1) = -0.5 * iu;
    L(1, 0) = 0.5; L(1, 1) = 0.5 * iu;
    L(2, 2) = 0.5; L(2, 3) = -0.5 * iu;
    L(3, 2) = 0.5; L(3, 3) = 0.5 * iu;
    return L;
}

inline SystemMatrices build_system_matrices(const SteadyState& ss, const CouplingState& cs,
                                            const CavityRates& rates, double omega_a_det,
                                            double omega_b_det) {
    SystemMatrices sm;
    const cplx e = cs.eps_bar;
    const cplx ec = std::conj(e);
    const cplx a = ss.a_bar;
    const cplx b = ss.b_bar;

    sm.M_c(0, 0) = iu * omega_a_det - rates.a.tot;
    sm.M_c(0, 1) = ec * b;
    sm.M_c(0, 2) = ec * std::conj(a);
    sm.M_c(1, 0) = e * std::conj(b);
    sm.M_c(1, 1) = -iu * omega_a_det - rates.a.tot;
    sm.M_c(1, 3) = e * a;
    sm.M_c(2, 0) = -e * a;
    sm.M_c(2, 2) = iu * omega_b_det - rates.b.tot;
    sm.M_c(3, 1) = -ec * std::conj(a);
    sm.M_c(3, 3) = -iu * omega_b_det - rates.b.tot;

    auto coupling_diag = [](double ga, double gb) {
        const double sa = std::sqrt(2.0 * ga);
        const double sb = std::sqrt(2.0 * gb);
        return Mat4::diag(sa, sa, sb, sb);
    };
    sm.M_in = coupling_diag(rates.a.in, rates.b.in);
    sm.M_out = coupling_diag(rates.a.out, rates.b.out);
    sm.M_sc = coupling_diag(rates.a.sc, rates.b.sc);
    sm.M_abs = coupling_diag(rates.a.abs, rates.b.abs);
    return sm;
}

// Response column of the photothermal effect: how a temperature fluctuation
// enters the four field equations, split into the coupling-strength part and
// the cavity-detuning part.
inline std::array<cplx, 4> photothermal_response_eps(const SteadyState& ss,
                                                     const ThermalCoeffs& tc) {
    const cplx a = ss.a_bar;
    const cplx b = ss.b_bar;
    const cplx g = tc.g_eps;
    return {std::conj(a) * b * std::conj(g), a * std::conj(b) * g, -0.5 * a * a * g,
            -0.5 * std::conj(a) * std::conj(a) * std::conj(g)};
}

inline std::array<cplx, 4> photothermal_response_omega(const SteadyState& ss,
                                                       const ThermalCoeffs& tc) {
    const cplx a = ss.a_bar;
    const cplx b = ss.b_bar;
    return {iu * a * tc.K_a, -iu * std::conj(a) * tc.K_a, iu * b * tc.K_b,
            -iu * std::conj(b) * tc.K_b};
}

// Drive row on the intra-cavity vector (delta a, delta a+, delta b, delta b+):
// absorbed-power heating per field quadrature.
inline std::array<double, 4> photothermal_drive_row(const ThermalCoeffs& tc,
                                                    const CavityRates& rates) {
    const double ra = tc.Pi_a * std::sqrt(2.0 * rates.a.abs);
    const double rb = tc.Pi_b * std::sqrt(2.0 * rates.b.abs);
    return {ra, ra, rb, rb};
}

// Drive row on the absorption vacuum vector.
inline std::array<double, 4> photothermal_drive_row_abs(const ThermalCoeffs& tc) {
    return {-tc.Pi_a, -tc.Pi_a, -tc.Pi_b, -tc.Pi_b};
}

inline PhotothermalMatrices build_photothermal_matrices(double omega, const SteadyState& ss,
                                                        const ThermalCoeffs& tc,
                                                        const CavityRates& rates) {
    PhotothermalMatrices pm;
    const cplx lp = 1.0 / (iu * omega + tc.omega_T);
    const auto v_eps = photothermal_response_eps(ss, tc);
    const auto v_om = photothermal_response_omega(ss, tc);
    const auto r_c = photothermal_drive_row(tc, rates);
    const auto r_abs = photothermal_drive_row_abs(tc);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto si = static_cast<size_t>(i);
            const auto sj = static_cast<size_t>(j);
            pm.M_eps_c(i, j) = lp * v_eps[si] * r_c[sj];
            pm.M_eps_abs(i, j) = lp * v_eps[si] * r_abs[sj];
            pm.M_omega_c(i, j) = lp * v_om[si] * r_c[sj];
            pm.M_omega_abs(i, j) = lp * v_om[si] * r_abs[sj];
        }
    return pm;
}

// Full solution: one shared 4x4 inverse per frequency, conjugated into the
// quadrature basis. Theta_out carries the -I direct-reflection term.
inline ThetaSet transfer_matrices(double omega, const SystemMatrices& sm,
                                  const PhotothermalMatrices& pm) {
    const Mat4 S = iu * omega * Mat4::identity() - sm.M_c - pm.M_eps_c - pm.M_omega_c;
    const Mat4 G = invert(S, omega);
    const Mat4 L = lambda_matrix();
    const Mat4 Li = lambda_inverse();
    const Mat4 outG = sm.M_out * G;

    ThetaSet ts;
    ts.in = L * (outG * sm.M_in) * Li;
    ts.out = L * (outG * sm.M_out - Mat4::identity()) * Li;
    ts.sc = L * (outG * sm.M_sc) * Li;
    ts.abs = L * (outG * (sm.M_abs + pm.M_eps_abs + pm.M_omega_abs)) * Li;
    return ts;
}

// Reduced (photothermal-off) solution. As printed it also drops the
// absorption-vacuum channel, which is consistent because the photothermal-off
// limit is gamma_abs -> 0.
inline ThetaSet transfer_matrices_reduced(double omega, const SystemMatrices& sm) {
    const Mat4 S = iu * omega * Mat4::identity() - sm.M_c;
    const Mat4 G = invert(S, omega);
    const Mat4 L = lambda_matrix();
    const Mat4 Li = lambda_inverse();
    const Mat4 outG = sm.M_out * G;

    ThetaSet ts;
    ts.in = L * (outG * sm.M_in) * Li;
    ts.out = L * (outG * sm.M_out - Mat4::identity()) * Li;
    ts.sc = L * (outG * sm.M_sc) * Li;
    ts.abs = Mat4::zero();
    return ts;
}

} // namespace opasq
