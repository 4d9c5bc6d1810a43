#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ghal {

/// splitmix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// Seed of the `stream`-th substream of `seed`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream + 0x5851F42D4C957F2DULL));
}

/// Seeded random stream with platform-independent draws. The standard
/// distributions are implementation-defined, so the draws used here are
/// computed directly from the 64-bit engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Every raw engine output is appended to `sink` while set; used to
    /// check that paired trials consume identical streams.
    void set_tap(std::vector<std::uint64_t>* sink) noexcept { tap_ = sink; }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(raw() >> 11U) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's nearly-divisionless method with rejection.
        std::uint64_t x = raw();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = raw();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64U);
    }

    int below_int(int n) noexcept { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    std::uint64_t next_u64() noexcept { return raw(); }

private:
    std::uint64_t raw() noexcept {
        const std::uint64_t x = engine_();
        if (tap_ != nullptr) {
            tap_->push_back(x);
        }
        return x;
    }

    std::mt19937_64 engine_;
    std::vector<std::uint64_t>* tap_ = nullptr;
};

}  // namespace ghal
