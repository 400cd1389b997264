#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "opasq/constants.hpp"
#include "opasq/dynamics.hpp"
#include "opasq/errors.hpp"
#include "opasq/spectra.hpp"

namespace opasq {

// Time-domain Monte-Carlo check of the frequency-domain solution. The
// linearized system is driven by white noise on every open port and the output
// quadrature spectra are Welch-estimated. The state is propagated with the
// exact Gaussian one-step map (matrix exponential plus exact process-noise
// covariance), so the step size is set by the probe frequency, not by the
// fastest cavity decay; the output is accumulated as a per-step bin average
// whose sinc^2 response is divided out.
struct OracleOptions {
    int segment_length = 4096;  // Welch segment, power of two
    int segments = 256;         // segments per replica, 50% overlap
    int replicas = 8;           // independent seeded runs
    double fs_factor = 64.0;    // sampling rate as a multiple of the probe frequency
    uint64_t rng_seed = 1;
};

struct OracleEstimate {
    double omega = 0.0;   // probe (rad/s), snapped onto a Welch bin
    double V1 = 0.0;
    double V1_err = 0.0;  // 1-sigma statistical error across replicas
    double V2 = 0.0;
    double V2_err = 0.0;
};

namespace detail {

// --- small dense real matrix helpers (row-major) ---------------------------

struct RMat {
    int n = 0, m = 0;
    std::vector<double> a;
    RMat() = default;
    RMat(int rows, int cols) : n(rows), m(cols), a(static_cast<size_t>(rows * cols), 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<size_t>(i * m + j)]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i * m + j)]; }
};

inline RMat matmul(const RMat& x, const RMat& y) {
    RMat r(x.n, y.m);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.m; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.m; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

inline RMat transpose(const RMat& x) {
    RMat r(x.m, x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.m; ++j) r(j, i) = x(i, j);
    return r;
}

inline RMat add(const RMat& x, const RMat& y, double sy = 1.0) {
    RMat r = x;
    for (size_t k = 0; k < r.a.size(); ++k) r.a[k] += sy * y.a[k];
    return r;
}

inline double inf_norm(const RMat& x) {
    double best = 0.0;
    for (int i = 0; i < x.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < x.m; ++j) s += std::abs(x(i, j));
        best = std::max(best, s);
    }
    return best;
}

// Joint scaling-and-doubling of F(t) = e^{At} and Q(t) = int_0^t e^{As} S e^{A's} ds.
// Seeded with short-time Taylor series, then doubled:
//   F(2t) = F(t)^2,  Q(2t) = Q(t) + F(t) Q(t) F(t)'.
// Unconditionally valid for stiff A and for the singular augmented blocks.
inline void exp_and_cov(const RMat& A, const RMat& S, double dt, RMat& F, RMat& Q) {
    const int n = A.n;
    int halvings = 0;
    double norm_t = inf_norm(A) * dt;
    while (norm_t > 1.0 / 32.0 && halvings < 80) {
        norm_t *= 0.5;
        ++halvings;
    }
    const double t0 = dt / std::pow(2.0, halvings);

    // F(t0) by Taylor
    F = RMat(n, n);
    for (int i = 0; i < n; ++i) F(i, i) = 1.0;
    RMat term = F;
    for (int k = 1; k <= 12; ++k) {
        term = matmul(term, A);
        for (auto& v : term.a) v *= t0 / k;
        F = add(F, term);
    }

    // Q(t0) = sum_k P_k t0^{k+1}/(k+1)!, P_0 = S, P_{k+1} = A P_k + P_k A'
    Q = RMat(n, n);
    RMat P = S;
    double fac = t0;
    for (int k = 0; k <= 12; ++k) {
        Q = add(Q, P, fac);
        const RMat AP = matmul(A, P);
        P = add(AP, transpose(matmul(A, transpose(P))));
        fac *= t0 / (k + 2);
    }

    for (int h = 0; h < halvings; ++h) {
        const RMat FQ = matmul(F, Q);
        Q = add(Q, matmul(FQ, transpose(F)));
        // enforce symmetry against rounding drift
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double v = 0.5 * (Q(i, j) + Q(j, i));
                Q(i, j) = v;
                Q(j, i) = v;
            }
        F = matmul(F, F);
    }
}

// Cholesky-like factor of a PSD matrix with rank deficiency tolerated.
inline RMat psd_factor(const RMat& Q) {
    const int n = Q.n;
    RMat L(n, n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(Q(i, i)));
    const double tol = scale * 1e-13;
    for (int j = 0; j < n; ++j) {
        double d = Q(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= tol) {
            // treat as a null direction
            continue;
        }
        L(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = Q(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

// --- radix-2 FFT ------------------------------------------------------------

inline void fft_inplace(std::vector<cplx>& x) {
    const size_t n = x.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * constants::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// deterministic standard normal from raw 64-bit state (Box-Muller)
class NormalSource {
public:
    explicit NormalSource(uint64_t seed) : gen_(seed) {}

    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * constants::pi * u2;
        spare_ = r * std::sin(th);
        have_ = true;
        return r * std::cos(th);
    }

private:
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_ = false;
};

// Real quadrature-basis state-space of the linearized model:
// state Y = (X1_a, X2_a, X1_b, X2_b, dT), 16 white-noise ports.
struct QuadratureSystem {
    RMat A;             // 5x5
    RMat B;             // 5x16
    std::array<double, 16> port_variance{};
    double out_coupling = 0.0; // sqrt(2 gamma_a_out)
    int va_out_x1_col = 4;
    int va_out_x2_col = 5;
};

inline QuadratureSystem quadrature_system(const OpaModel& m) {
    QuadratureSystem qs;
    qs.A = RMat(5, 5);
    qs.B = RMat(5, 16);

    const Mat4 L = lambda_matrix();
    const Mat4 Li = lambda_inverse();
    const Mat4 Aq = L * m.matrices.M_c * Li;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) qs.A(i, j) = Aq(i, j).real();

    // photothermal response column and thermal drive row
    const auto v_eps = photothermal_response_eps(m.steady, m.thermal);
    const auto v_om = photothermal_response_omega(m.steady, m.thermal);
    std::array<cplx, 4> v{};
    for (size_t k = 0; k < 4; ++k) v[k] = v_eps[k] + v_om[k];
    qs.A(0, 4) = (v[0] + v[1]).real();
    qs.A(1, 4) = (iu * (v[0] - v[1])).real();
    qs.A(2, 4) = (v[2] + v[3]).real();
    qs.A(3, 4) = (iu * (v[2] - v[3])).real();

    const auto rc = photothermal_drive_row(m.thermal, m.rates);
    qs.A(4, 0) = rc[0];
    qs.A(4, 2) = rc[2];
    qs.A(4, 4) = -m.thermal.omega_T;

    // ports: (A_in, B_in, va_out, vb_out, va_sc, vb_sc, va_abs, vb_abs) x (X1, X2)
    auto couple = [&](int col0, double ga, double gb) {
        const double sa = std::sqrt(2.0 * ga);
        const double sb = std::sqrt(2.0 * gb);
        qs.B(0, col0) = sa;
        qs.B(1, col0 + 1) = sa;
        qs.B(2, col0 + 2) = sb;
        qs.B(3, col0 + 3) = sb;
    };
    // input ports couple a to cols 0,1 and b to cols 2,3
    couple(0, m.rates.a.in, m.rates.b.in);
    couple(4, m.rates.a.out, m.rates.b.out);
    couple(8, m.rates.a.sc, m.rates.b.sc);
    couple(12, m.rates.a.abs, m.rates.b.abs);

    const auto rabs = photothermal_drive_row_abs(m.thermal);
    qs.B(4, 12) = rabs[0]; // -Pi_a on X1 of va_abs
    qs.B(4, 14) = rabs[2]; // -Pi_b on X1 of vb_abs

    qs.port_variance = {m.params.V_A1_in, m.params.V_A2_in, m.params.V_B1_in, m.params.V_B2_in,
                        1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    qs.out_coupling = std::sqrt(2.0 * m.rates.a.out);
    return qs;
}

struct WelchAccumulator {
    std::vector<double> window;
    double window_power = 0.0;

    explicit WelchAccumulator(int L) : window(static_cast<size_t>(L)) {
        for (int k = 0; k < L; ++k)
            window[static_cast<size_t>(k)] =
                0.5 * (1.0 - std::cos(2.0 * constants::pi * k / L));
        for (double w : window) window_power += w * w;
    }

    // two-sided PSD (density, per Hz) at the requested bins
    void accumulate(const std::vector<double>& x, double dt, const std::vector<int>& bins,
                    std::vector<double>& psd_sum, int& count) const {
        const int L = static_cast<int>(window.size());
        const int hop = L / 2;
        std::vector<cplx> buf(static_cast<size_t>(L));
        for (int start = 0; start + L <= static_cast<int>(x.size()); start += hop) {
            for (int k = 0; k < L; ++k)
                buf[static_cast<size_t>(k)] =
                    x[static_cast<size_t>(start + k)] * window[static_cast<size_t>(k)];
            fft_inplace(buf);
            for (size_t bi = 0; bi < bins.size(); ++bi)
                psd_sum[bi] += std::norm(buf[static_cast<size_t>(bins[bi])]) * dt / window_power;
            ++count;
        }
    }
};

} // namespace detail

// Welch-estimated output quadrature variances at the probe frequencies.
// Each probe runs at its own sampling rate fs = fs_factor * f_probe, so the
// probe lands exactly on Welch bin L / fs_factor.
inline std::vector<OracleEstimate> sde_oracle(const OpaModel& m,
                                              const std::vector<double>& probe_omegas,
                                              const OracleOptions& opt = {}) {
    const int L = opt.segment_length;
    if (L < 64 || (L & (L - 1)) != 0)
        throw UnstableIntegrationError("segment_length must be a power of two >= 64");
    if (opt.fs_factor < 8.0)
        throw UnstableIntegrationError("fs_factor below the sampling bound (needs >= 8)");
    if (opt.segments < 2 || opt.replicas < 2)
        throw UnstableIntegrationError("need at least 2 segments and 2 replicas");
    const int probe_bin = static_cast<int>(std::lround(L / opt.fs_factor));
    if (probe_bin < 4 || probe_bin > L / 2 - 2)
        throw UnstableIntegrationError("probe bin out of range; adjust fs_factor or segment_length");

    detail::QuadratureSystem qs = detail::quadrature_system(m);

    // Balance the thermal state: the response coupling (fields per kelvin) and
    // the drive coupling (kelvin per field) differ by ~15 orders of magnitude,
    // which would poison the exponential doubling. A diagonal similarity
    // T -> s T equalizes them and leaves the output samples untouched.
    {
        double resp = 0.0, drive = 0.0;
        for (int i = 0; i < 4; ++i) {
            resp = std::max(resp, std::abs(qs.A(i, 4)));
            drive = std::max(drive, std::abs(qs.A(4, i)));
        }
        for (int k = 0; k < 16; ++k) drive = std::max(drive, std::abs(qs.B(4, k)));
        if (resp > 0.0 && drive > 0.0) {
            const double s = std::sqrt(resp / drive);
            for (int i = 0; i < 4; ++i) {
                qs.A(i, 4) /= s;
                qs.A(4, i) *= s;
            }
            for (int k = 0; k < 16; ++k) qs.B(4, k) *= s;
        }
    }

    // augmented system: Y (5) plus output bin integrators (2)
    detail::RMat A(7, 7), B(7, 16);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) A(i, j) = qs.A(i, j);
    A(5, 0) = qs.out_coupling; // z1' = sqrt(2 g_out) X1_a - X1_va_out
    A(6, 1) = qs.out_coupling;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 16; ++j) B(i, j) = qs.B(i, j);
    B(5, qs.va_out_x1_col) = -1.0;
    B(6, qs.va_out_x2_col) = -1.0;

    detail::RMat Sigma(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            double s = 0.0;
            for (int k = 0; k < 16; ++k)
                s += B(i, k) * B(j, k) * qs.port_variance[static_cast<size_t>(k)];
            Sigma(i, j) = s;
        }

    std::vector<OracleEstimate> out;
    const int n_samples = (opt.segments + 1) * (L / 2);
    const int burn = 4 * L;

    for (size_t pi = 0; pi < probe_omegas.size(); ++pi) {
        const double f_probe = probe_omegas[pi] / (2.0 * constants::pi);
        if (!(f_probe > 0.0)) throw UnstableIntegrationError("probe frequency must be > 0");
        const double fs = opt.fs_factor * f_probe;
        const double dt = 1.0 / fs;

        detail::RMat F, Q;
        detail::exp_and_cov(A, Sigma, dt, F, Q);
        const detail::RMat Lq = detail::psd_factor(Q);

        const std::vector<int> bins = {probe_bin - 1, probe_bin, probe_bin + 1};
        std::vector<double> v1_rep, v2_rep;

        for (int rep = 0; rep < opt.replicas; ++rep) {
            detail::NormalSource rng(opt.rng_seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull * (static_cast<uint64_t>(rep) + 1) +
                                     1315423911ull * static_cast<uint64_t>(pi));
            std::array<double, 7> y{};
            std::vector<double> x1(static_cast<size_t>(n_samples));
            std::vector<double> x2(static_cast<size_t>(n_samples));

            auto step = [&](bool record, int idx) {
                std::array<double, 7> g{};
                for (auto& v : g) v = rng();
                std::array<double, 7> w{};
                for (int i = 0; i < 7; ++i) {
                    double s = 0.0;
                    for (int j = 0; j <= i; ++j) s += Lq(i, j) * g[static_cast<size_t>(j)];
                    w[static_cast<size_t>(i)] = s;
                }
                std::array<double, 7> yn{};
                for (int i = 0; i < 7; ++i) {
                    double s = w[static_cast<size_t>(i)];
                    for (int j = 0; j < 5; ++j) s += F(i, j) * y[static_cast<size_t>(j)];
                    yn[static_cast<size_t>(i)] = s;
                }
                if (record) {
                    x1[static_cast<size_t>(idx)] = yn[5] / dt;
                    x2[static_cast<size_t>(idx)] = yn[6] / dt;
                }
                for (int i = 0; i < 5; ++i) y[static_cast<size_t>(i)] = yn[static_cast<size_t>(i)];
            };

            for (int k = 0; k < burn; ++k) step(false, 0);
            for (int k = 0; k < n_samples; ++k) step(true, k);

            const detail::WelchAccumulator welch(L);
            std::vector<double> p1(bins.size(), 0.0), p2(bins.size(), 0.0);
            int c1 = 0, c2 = 0;
            welch.accumulate(x1, dt, bins, p1, c1);
            welch.accumulate(x2, dt, bins, p2, c2);

            double s1 = 0.0, s2 = 0.0;
            for (size_t bi = 0; bi < bins.size(); ++bi) {
                const double f_bin = static_cast<double>(bins[bi]) * fs / L;
                const double sx = constants::pi * f_bin * dt;
                const double corr = sinc(sx) * sinc(sx); // bin-average response
                s1 += p1[bi] / (c1 * corr);
                s2 += p2[bi] / (c2 * corr);
            }
            v1_rep.push_back(s1 / static_cast<double>(bins.size()));
            v2_rep.push_back(s2 / static_cast<double>(bins.size()));
        }

        auto mean_err = [](const std::vector<double>& v) {
            double mu = 0.0;
            for (double x : v) mu += x;
            mu /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mu) * (x - mu);
            var /= static_cast<double>(v.size() - 1);
            return std::pair<double, double>(mu, std::sqrt(var / static_cast<double>(v.size())));
        };
        const auto [m1, e1] = mean_err(v1_rep);
        const auto [m2, e2] = mean_err(v2_rep);
        OracleEstimate est;
        est.omega = 2.0 * constants::pi * static_cast<double>(probe_bin) * fs / L;
        est.V1 = m1;
        est.V1_err = e1;
        est.V2 = m2;
        est.V2_err = e2;
        out.push_back(est);
    }
    return out;
}

inline std::vector<OracleEstimate> sde_oracle(const OpaParams& p,
                                              const std::vector<double>& probe_omegas,
                                              const OracleOptions& opt = {}) {
    return sde_oracle(build_model(p), probe_omegas, opt);
}

} // namespace opasq
