#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "opasq/config.hpp"
#include "opasq/oracle.hpp"
#include "opasq/spectra.hpp"

using namespace opasq;
using opasq::detail::RMat;

TEST_CASE("one-step covariance of a stiff scalar OU process") {
    // dx = -g x dt + s dW: Q(dt) = s^2 (1 - e^{-2 g dt}) / (2 g)
    for (double g : {1.0, 1e3, 4.6e9}) {
        for (double dt : {1e-4, 5e-2}) {
            RMat A(1, 1), S(1, 1), F, Q;
            A(0, 0) = -g;
            S(0, 0) = 2.0;
            detail::exp_and_cov(A, S, dt, F, Q);
            const double fe = std::exp(-g * dt);
            const double qe = 2.0 * (1.0 - std::exp(-2.0 * g * dt)) / (2.0 * g);
            CHECK(F(0, 0) == doctest::Approx(fe).epsilon(1e-10));
            CHECK(Q(0, 0) == doctest::Approx(qe).epsilon(1e-10));
        }
    }
}

TEST_CASE("one-step covariance matches a fine-step quadrature on a dense system") {
    // 3-state damped rotation driven through a skewed noise matrix
    RMat A(3, 3), B(3, 2);
    A(0, 0) = -2.0; A(0, 1) = 30.0;  A(0, 2) = 0.5;
    A(1, 0) = -30.0; A(1, 1) = -2.0; A(1, 2) = 1.0;
    A(2, 0) = 0.2;  A(2, 1) = -0.4;  A(2, 2) = -5.0;
    B(0, 0) = 1.0; B(1, 1) = 2.0; B(2, 0) = 0.3; B(2, 1) = -0.7;
    RMat S(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 2; ++k) S(i, j) += B(i, k) * B(j, k);

    const double dt = 0.37;
    RMat F, Q;
    detail::exp_and_cov(A, S, dt, F, Q);

    // Riemann-midpoint integral of e^{As} S e^{A's} with small steps
    const int n_steps = 20000;
    const double h = dt / n_steps;
    RMat E, Qh;
    detail::exp_and_cov(A, S, h, E, Qh); // E = e^{Ah}
    RMat Qref(3, 3);
    RMat P = S; // holds e^{As} S e^{A's}
    // trapezoid in s
    for (int step = 0; step < n_steps; ++step) {
        RMat Pn = detail::matmul(detail::matmul(E, P), detail::transpose(E));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                Qref(i, j) += 0.5 * h * (P(i, j) + Pn(i, j));
        P = Pn;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(Q(i, j) == doctest::Approx(Qref(i, j)).epsilon(1e-6));
}

TEST_CASE("augmented integrator block keeps identity columns") {
    // [[A, 0], [C, 0]]: the z block of exp must stay exactly identity
    RMat A(3, 3), S(3, 3);
    A(0, 0) = -4.0; A(0, 1) = 2.0;
    A(1, 1) = -1.0;
    A(2, 0) = 1.5; // z row
    S(0, 0) = 1.0; S(1, 1) = 1.0;
    RMat F, Q;
    detail::exp_and_cov(A, S, 0.2, F, Q);
    CHECK(F(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(F(0, 2) == 0.0);
    CHECK(F(1, 2) == 0.0);
}

TEST_CASE("psd factor reproduces rank-deficient covariances") {
    RMat Q(3, 3);
    // rank-2: outer products of (1,2,0) and (0,1,1)
    const double v1[3] = {1.0, 2.0, 0.0};
    const double v2[3] = {0.0, 1.0, 1.0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Q(i, j) = v1[i] * v1[j] + v2[i] * v2[j];
    const RMat L = detail::psd_factor(Q);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += L(i, k) * L(j, k);
            CHECK(s == doctest::Approx(Q(i, j)).epsilon(1e-12));
        }
}

TEST_CASE("fft matches a direct DFT") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    const size_t n = 64;
    std::vector<cplx> x(n);
    for (auto& v : x) v = {nd(gen), nd(gen)};
    std::vector<cplx> ref(n);
    for (size_t j = 0; j < n; ++j) {
        cplx s = 0.0;
        for (size_t k = 0; k < n; ++k)
            s += x[k] * std::exp(-iu * (2.0 * constants::pi * static_cast<double>(j * k) /
                                        static_cast<double>(n)));
        ref[j] = s;
    }
    detail::fft_inplace(x);
    for (size_t j = 0; j < n; ++j)
        CHECK(std::abs(x[j] - ref[j]) < 1e-9);
}

TEST_CASE("passive cavity oracle estimates shot noise at every probe") {
    OpaParams p = load_params("");
    p.kappa0 = 0.0;
    p.pump_fraction.reset();
    p.P_pump = 0.02;
    p.sigma_a_abs = 0.0;
    p.sigma_b_abs = 0.0;
    OracleOptions opt;
    opt.segments = 96;
    opt.replicas = 4;
    opt.rng_seed = 77;
    const std::vector<double> probes = {2.0 * constants::pi * 200.0,
                                        2.0 * constants::pi * 2e5};
    const auto est = sde_oracle(build_model(p), probes, opt);
    REQUIRE(est.size() == 2);
    for (const auto& e : est) {
        CHECK(e.V1 == doctest::Approx(1.0).epsilon(0.08));
        CHECK(e.V2 == doctest::Approx(1.0).epsilon(0.08));
        CHECK(e.V1_err < 0.1);
        CHECK(e.V2_err < 0.1);
    }
}

TEST_CASE("same seed reproduces bit-identical estimates") {
    const OpaParams p = load_params("");
    const OpaModel m = build_model(p);
    OracleOptions opt;
    opt.segments = 16;
    opt.replicas = 2;
    opt.rng_seed = 1234;
    const std::vector<double> probes = {2.0 * constants::pi * 1e5};
    const auto a = sde_oracle(m, probes, opt);
    const auto b = sde_oracle(m, probes, opt);
    CHECK(a[0].V1 == b[0].V1);
    CHECK(a[0].V2 == b[0].V2);
    CHECK(a[0].V1_err == b[0].V1_err);

    opt.rng_seed = 4321;
    const auto c = sde_oracle(m, probes, opt);
    CHECK(a[0].V1 != c[0].V1);
}

TEST_CASE("squeezed band estimate agrees with the frequency-domain model") {
    const OpaParams p = load_params("");
    const OpaModel m = build_model(p);
    OracleOptions opt;
    opt.segments = 128;
    opt.replicas = 4;
    opt.rng_seed = 9;
    const double probe = 2.0 * constants::pi * 3e5;
    const auto est = sde_oracle(m, {probe}, opt);
    const auto v = output_variances(theta_at(m, est[0].omega), input_variances(p));
    CHECK(est[0].V1 == doctest::Approx(v[0]).epsilon(0.1));
    CHECK(est[0].V2 == doctest::Approx(v[1]).epsilon(0.1));
}

TEST_CASE("option validation") {
    const OpaModel m = build_model(load_params(""));
    OracleOptions opt;
    opt.segment_length = 1000; // not a power of two
    CHECK_THROWS_AS(sde_oracle(m, {1e4}, opt), UnstableIntegrationError);
    opt = OracleOptions{};
    opt.fs_factor = 4.0;
    CHECK_THROWS_AS(sde_oracle(m, {1e4}, opt), UnstableIntegrationError);
    opt = OracleOptions{};
    CHECK_THROWS_AS(sde_oracle(m, {-5.0}, opt), UnstableIntegrationError);
}
