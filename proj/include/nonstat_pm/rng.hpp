#pragma once

#include <cstdint>

namespace nspm {

// Stateless counter-based generator: draw(i) = mix64(key + i * gamma), with
// the key derived from (seed, stream). Any index can be generated without
// touching its predecessors, so parallel workers and replays are
// order-independent by construction.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(derive_key(seed, stream)) {}

    std::uint64_t bits(std::uint64_t index) const noexcept {
        return mix64(key_ + index * kGamma);
    }

    // uniform in [0,1) with 53-bit resolution
    double uniform(std::uint64_t index) const noexcept {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t index, double lo, double hi) const noexcept {
        return lo + (hi - lo) * uniform(index);
    }

    // symmetric uniform in [-1,1]
    double symmetric(std::uint64_t index) const noexcept {
        return 2.0 * uniform(index) - 1.0;
    }

    static std::uint64_t mix64(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
        std::uint64_t k = mix64(seed + kGamma);
        return mix64(k ^ mix64(stream + 0x5851f42d4c957f2dULL));
    }

    std::uint64_t key_;
};

// Sequential convenience wrapper over CounterRng.
class StreamRng {
public:
    explicit StreamRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : rng_(seed, stream) {}

    double uniform() noexcept { return rng_.uniform(next_++); }
    double uniform(double lo, double hi) noexcept { return rng_.uniform(next_++, lo, hi); }
    std::uint64_t bits() noexcept { return rng_.bits(next_++); }

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

}  // namespace nspm
