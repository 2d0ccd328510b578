#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace fidmet {

// Seeded, splittable pseudo-random stream. A stream is identified by its
// 64-bit seed; child(i) derives the seed of an independent stream without
// consuming any state from the parent, so trials can be split across
// threads while staying bit-reproducible for a fixed root seed.
//
// Gaussian variates are produced by Box-Muller on uniforms built directly
// from mt19937_64 output words, so the byte stream is fully pinned by the
// C++ standard rather than by the library's distribution implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix(seed, 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t seed() const { return seed_; }

    RngStream child(std::uint64_t index) const { return RngStream(mix(seed_, index)); }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 6.283185307179586476925286766559 * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::complex<double> normal_complex() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        return splitmix(a ^ splitmix(b + 0xd1b54a32d192ed03ULL));
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fidmet
