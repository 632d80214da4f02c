#pragma once

#include <cstdint>

namespace garkit {

// Counter-based pseudo-random stream: output k is a pure function of
// (seed, stream, k), so replicates can be assigned to worker threads in any
// order without changing the numbers they see.  The generator walks a Weyl
// sequence from a mixed key and applies the splitmix64 finalizer.
class counter_rng {
public:
    explicit counter_rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(derive_key(seed, stream)) {}

    std::uint64_t next_u64() noexcept {
        std::uint64_t z = key_ + golden * ++counter_;
        return finalize(z);
    }

    // Uniform on the open interval (0,1): 53-bit mantissa offset by half an
    // ulp so 0.0 and 1.0 are never produced.
    double next_uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t finalize(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
        std::uint64_t k = finalize(seed + golden);
        k ^= finalize(stream + 0xD1B54A32D192ED03ull);
        return finalize(k + golden);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace garkit
