#pragma once

#include <cstdint>
#include <cstddef>

namespace deltasim {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Stateless bit mixer used
// both for stream-seed derivation and as the per-stream generator core.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Folds one 64-bit value into a running seed hash. Chaining this over
// (master_seed, cell, trial, ...) gives every work item its own stream seed,
// independent of scheduling order.
constexpr std::uint64_t chain_seed(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h + kGolden * (v + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) noexcept {
    return chain_seed(mix64(master + kGolden), a);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return chain_seed(derive_seed(master, a), b);
}

// Counter-free SplitMix64 stream addressed by (master_seed, stream_index).
// The same pair always reproduces the identical sample sequence; distinct
// stream indices give independently-behaving sequences, so concurrent
// workers can each own a stream without coordination.
//
// Gaussians use the Marsaglia polar method so the sequence is reproducible
// on any platform with IEEE-754 doubles and a deterministic libm.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : state_(derive_seed(master_seed, stream_index)) {}

    explicit RngStream(std::uint64_t raw_state) noexcept : state_(mix64(raw_state + kGolden)) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

    // Standard normal via the polar method; second variate of each accepted
    // pair is cached.
    double next_gaussian() noexcept;

    // Fills out[0..n) with iid standard normals. Does not use the cache, so
    // bulk and scalar draws interleave deterministically.
    void fill_gaussian(double* out, std::size_t n) noexcept;

    // Exact Binomial(n, p) variate. Bernoulli counting for small n,
    // inversion for small mean, otherwise lgamma-based rejection
    // (Press et al., Numerical Recipes 3rd ed., sec. 7.3).
    long long next_binomial(long long n, double p) noexcept;

private:
    std::uint64_t state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_ = false;
};

} // namespace deltasim
