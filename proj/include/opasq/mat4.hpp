#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "opasq/constants.hpp"
#include "opasq/errors.hpp"

namespace opasq {

// Dense complex 4x4 matrix, row-major. The linearized field equations live in
// this fixed dimension, so a direct partial-pivot solve beats any library
// dispatch and keeps the per-frequency cost trivial.
struct Mat4 {
    std::array<cplx, 16> m{};

    cplx& operator()(int i, int j) { return m[static_cast<size_t>(4 * i + j)]; }
    const cplx& operator()(int i, int j) const { return m[static_cast<size_t>(4 * i + j)]; }

    static Mat4 zero() { return Mat4{}; }

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
        return r;
    }

    static Mat4 diag(cplx d0, cplx d1, cplx d2, cplx d3) {
        Mat4 r;
        r(0, 0) = d0;
        r(1, 1) = d1;
        r(2, 2) = d2;
        r(3, 3) = d3;
        return r;
    }

    Mat4 operator+(const Mat4& o) const {
        Mat4 r;
        for (size_t k = 0; k < 16; ++k) r.m[k] = m[k] + o.m[k];
        return r;
    }

    Mat4 operator-(const Mat4& o) const {
        Mat4 r;
        for (size_t k = 0; k < 16; ++k) r.m[k] = m[k] - o.m[k];
        return r;
    }

    Mat4 operator*(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                cplx s = 0.0;
                for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat4 operator*(cplx s) const {
        Mat4 r;
        for (size_t k = 0; k < 16; ++k) r.m[k] = m[k] * s;
        return r;
    }

    double max_abs() const {
        double v = 0.0;
        for (const auto& e : m) v = std::max(v, std::abs(e));
        return v;
    }
};

inline Mat4 operator*(cplx s, const Mat4& a) { return a * s; }

// LU factorization with partial pivoting; throws SingularSystemError tagged
// with the sweep frequency when a pivot collapses relative to the matrix scale.
inline Mat4 invert(const Mat4& a, double omega_for_error = 0.0) {
    std::array<cplx, 16> lu = a.m;
    std::array<int, 4> piv{0, 1, 2, 3};
    const double scale = a.max_abs();
    const double tiny = scale * 1e-14;

    for (int col = 0; col < 4; ++col) {
        int best = col;
        double best_mag = std::abs(lu[static_cast<size_t>(4 * col + col)]);
        for (int r = col + 1; r < 4; ++r) {
            double mag = std::abs(lu[static_cast<size_t>(4 * r + col)]);
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        if (best_mag <= tiny) throw SingularSystemError(omega_for_error);
        if (best != col) {
            for (int j = 0; j < 4; ++j)
                std::swap(lu[static_cast<size_t>(4 * best + j)], lu[static_cast<size_t>(4 * col + j)]);
            std::swap(piv[static_cast<size_t>(best)], piv[static_cast<size_t>(col)]);
        }
        const cplx p = lu[static_cast<size_t>(4 * col + col)];
        for (int r = col + 1; r < 4; ++r) {
            const cplx f = lu[static_cast<size_t>(4 * r + col)] / p;
            lu[static_cast<size_t>(4 * r + col)] = f;
            for (int j = col + 1; j < 4; ++j)
                lu[static_cast<size_t>(4 * r + j)] -= f * lu[static_cast<size_t>(4 * col + j)];
        }
    }

    Mat4 inv;
    for (int rhs = 0; rhs < 4; ++rhs) {
        std::array<cplx, 4> x{};
        for (int i = 0; i < 4; ++i) x[static_cast<size_t>(i)] = (piv[static_cast<size_t>(i)] == rhs) ? 1.0 : 0.0;
        for (int i = 1; i < 4; ++i)
            for (int j = 0; j < i; ++j)
                x[static_cast<size_t>(i)] -= lu[static_cast<size_t>(4 * i + j)] * x[static_cast<size_t>(j)];
        for (int i = 3; i >= 0; --i) {
            for (int j = i + 1; j < 4; ++j)
                x[static_cast<size_t>(i)] -= lu[static_cast<size_t>(4 * i + j)] * x[static_cast<size_t>(j)];
            x[static_cast<size_t>(i)] /= lu[static_cast<size_t>(4 * i + i)];
        }
        for (int i = 0; i < 4; ++i) inv(i, rhs) = x[static_cast<size_t>(i)];
    }
    return inv;
}

inline cplx det(const Mat4& a) {
    std::array<cplx, 16> lu = a.m;
    cplx d = 1.0;
    for (int col = 0; col < 4; ++col) {
        int best = col;
        double best_mag = std::abs(lu[static_cast<size_t>(4 * col + col)]);
        for (int r = col + 1; r < 4; ++r) {
            double mag = std::abs(lu[static_cast<size_t>(4 * r + col)]);
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        if (best_mag == 0.0) return 0.0;
        if (best != col) {
            for (int j = 0; j < 4; ++j)
                std::swap(lu[static_cast<size_t>(4 * best + j)], lu[static_cast<size_t>(4 * col + j)]);
            d = -d;
        }
        const cplx p = lu[static_cast<size_t>(4 * col + col)];
        d *= p;
        for (int r = col + 1; r < 4; ++r) {
            const cplx f = lu[static_cast<size_t>(4 * r + col)] / p;
            for (int j = col + 1; j < 4; ++j)
                lu[static_cast<size_t>(4 * r + j)] -= f * lu[static_cast<size_t>(4 * col + j)];
        }
    }
    return d;
}

} // namespace opasq
