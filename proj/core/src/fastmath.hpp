// Internal polynomial kernels for the aggregate-sampler hot loop. Plain
// arithmetic with no branches or libm calls in the per-element path, so the
// block loops in trainer.cpp auto-vectorize. Near-minimax Chebyshev fits;
// absolute error <= ~2e-16 on the stated ranges (checked in test_fastmath).
#pragma once

#include <bit>
#include <cstdint>

namespace deltasim::detail {

// sin(x) for |x| <= pi/2 + 0.01
inline double poly_sin(double x) {
    const double y = x * x;
    double p = -7.3709635346858013166e-13;
    p = p * y + 1.6047891956123885901e-10;
    p = p * y - 2.5051873235067995567e-8;
    p = p * y + 2.7557316473841483744e-6;
    p = p * y - 0.00019841269823793141029;
    p = p * y + 0.0083333333332787733228;
    p = p * y - 0.16666666666666017614;
    p = p * y + 0.99999999999999987329;
    return x * p;
}

// cos(x) for |x| <= pi/2 + 0.01
inline double poly_cos(double x) {
    const double y = x * x;
    double p = -1.511354807477305601e-16;
    p = p * y + 4.7768059709425900478e-14;
    p = p * y - 1.1470667260685564629e-11;
    p = p * y + 2.0876755598200014947e-9;
    p = p * y - 2.7557319208720448366e-7;
    p = p * y + 0.000024801587301485185198;
    p = p * y - 0.0013888888888888496465;
    p = p * y + 0.041666666666666659007;
    p = p * y - 0.49999999999999999942;
    p = p * y + 0.99999999999999999999;
    return p;
}

// ln(v) for normal positive v (no zero/inf/nan/subnormal handling).
inline double poly_log(double v) {
    constexpr double kSqrt2 = 1.4142135623730951;
    constexpr double kLn2Hi = 0.69314718055994528623;
    constexpr double kLn2Lo = 2.3190468138462996155e-17;
    constexpr double kTwo52 = 4503599627370496.0;

    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    // exponent as a double via the 2^52 magic-number trick (stays in vector lanes)
    const double e_raw =
        std::bit_cast<double>((bits >> 52) | 0x4330000000000000ULL) - (kTwo52 + 1023.0);
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL);
    const bool fold = m >= kSqrt2; // keep |z| small: m in [sqrt2/2, sqrt2)
    const double e = fold ? e_raw + 1.0 : e_raw;
    m = fold ? 0.5 * m : m;

    const double z = (m - 1.0) / (m + 1.0);
    const double w = z * z;
    double p = 0.084189067844493211893;
    p = p * w + 0.090609610019468210193;
    p = p * w + 0.11111717460704102831;
    p = p * w + 0.14285708007987823194;
    p = p * w + 0.2000000003088652789;
    p = p * w + 0.3333333333327642434;
    p = p * w + 1.000000000000000171;
    return 2.0 * z * p + e * kLn2Lo + e * kLn2Hi;
}

} // namespace deltasim::detail
