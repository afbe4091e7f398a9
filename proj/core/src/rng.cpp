#include "deltasim/rng.hpp"

#include <cmath>

namespace deltasim {

double RngStream::next_gaussian() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_gaussian_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_gaussian_ = v * m;
    has_cached_ = true;
    return u * m;
}

void RngStream::fill_gaussian(double* out, std::size_t n) noexcept {
    std::size_t i = 0;
    while (i + 1 < n) {
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        out[i++] = u * m;
        out[i++] = v * m;
    }
    if (i < n) out[i] = next_gaussian();
}

namespace {

// Binomial via explicit Bernoulli trials; exact for any n but O(n).
long long binomial_count(long long n, double p, RngStream& rng) noexcept {
    long long k = 0;
    for (long long i = 0; i < n; ++i)
        if (rng.next_double() < p) ++k;
    return k;
}

// CDF inversion by multiplicative recurrence; O(np) expected.
long long binomial_inversion(long long n, double p, RngStream& rng) noexcept {
    const double q = 1.0 - p;
    const double r = p / q;
    double pmf = std::pow(q, static_cast<double>(n));
    double cdf = pmf;
    const double u = rng.next_double();
    long long k = 0;
    while (u > cdf && k < n) {
        ++k;
        pmf *= r * static_cast<double>(n - k + 1) / static_cast<double>(k);
        cdf += pmf;
    }
    return k;
}

// Rejection sampling with a Lorentzian envelope; O(1) expected for large np.
long long binomial_rejection(long long n, double p, RngStream& rng) noexcept {
    const double en = static_cast<double>(n);
    const double np = en * p;
    const double g = std::lgamma(en + 1.0);
    const double plog = std::log(p);
    const double pclog = std::log1p(-p);
    const double sq = std::sqrt(2.0 * np * (1.0 - p));
    double em;
    double t;
    do {
        double y;
        do {
            const double angle = 3.14159265358979323846 * rng.next_double();
            y = std::tan(angle);
            em = sq * y + np;
        } while (em < 0.0 || em >= en + 1.0);
        em = std::floor(em);
        t = 1.2 * sq * (1.0 + y * y) *
            std::exp(g - std::lgamma(em + 1.0) - std::lgamma(en - em + 1.0) +
                     em * plog + (en - em) * pclog);
    } while (rng.next_double() > t);
    return static_cast<long long>(em);
}

} // namespace

long long RngStream::next_binomial(long long n, double p) noexcept {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - next_binomial(n, 1.0 - p);
    const double np = static_cast<double>(n) * p;
    if (n <= 64) return binomial_count(n, p, *this);
    if (np < 30.0) return binomial_inversion(n, p, *this);
    return binomial_rejection(n, p, *this);
}

} // namespace deltasim
