#pragma once

// Counter-based, splittable 64-bit generator.
//
// Draw number c of a stream with key k is mix(k, c), so a stream's output does
// not depend on how many draws other streams made or in which order workers
// ran. Children are derived from (parent key, child index) only.

#include <cstdint>
#include <limits>

namespace rankest {

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) noexcept : key_(fmix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return at(counter_++); }

    /// Output at an absolute counter position; does not advance the stream.
    result_type at(std::uint64_t counter) const noexcept {
        return splitmix(key_ ^ fmix(counter * 0x9e3779b97f4a7c15ULL + 0xbb67ae8584caa73bULL));
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by inversion of the CDF.
    double normal();

    CounterRng split(std::uint64_t index) const noexcept {
        CounterRng child(0);
        child.key_ = fmix(key_ ^ splitmix(index + 0x3c6ef372fe94f82bULL));
        return child;
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t fmix(std::uint64_t z) noexcept {
        z ^= z >> 33;
        z *= 0xff51afd7ed558ccdULL;
        z ^= z >> 33;
        z *= 0xc4ceb9fe1a85ec53ULL;
        z ^= z >> 33;
        return z;
    }

    static constexpr std::uint64_t splitmix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace rankest
