#pragma once

#include <complex>

namespace opasq {

using cplx = std::complex<double>;

namespace constants {

inline constexpr double c0 = 299792458.0;          // speed of light, m/s
inline constexpr double hbar = 1.054571817e-34;    // reduced Planck constant, J*s
inline constexpr double pi = 3.141592653589793238462643383279502884;

} // namespace constants

inline constexpr cplx iu{0.0, 1.0};

} // namespace opasq
