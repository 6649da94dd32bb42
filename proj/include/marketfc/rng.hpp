#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace marketfc {

/// SplitMix64 step. Used to expand a single 64-bit seed into generator state
/// and to derive independent sub-seeds from string keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic pseudo-random source shared by every stochastic component.
///
/// The stream is fully specified so corpora and training runs reproduce
/// across compilers and platforms:
///   * state: xoshiro256** (Blackman & Vigna), seeded by four SplitMix64 draws;
///   * uniform():  top 53 bits of next() scaled by 2^-53, in [0, 1);
///   * uniform_int(lo, hi): rejection sampling on the 64-bit output, inclusive;
///   * normal(): Box-Muller on two uniforms, no cached second variate.
/// Standard-library distributions are deliberately not used because their
/// algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;
    double uniform() noexcept;
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;
    double normal(double mean = 0.0, double stddev = 1.0) noexcept;

    template <typename T>
    void shuffle(std::span<T> values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, i - 1));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> s_{};
};

/// Mixes a root seed with a textual key (FNV-1a then SplitMix64) so each
/// experiment cell gets an independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view key) noexcept;

}  // namespace marketfc
