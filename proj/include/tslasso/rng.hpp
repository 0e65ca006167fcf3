#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace tslasso {

/**
 * Philox4x32-10 counter-based generator (Salmon et al., Random123).
 *
 * The 64-bit key selects an independent stream; the 128-bit counter walks
 * through it. Two generators with the same key produce the same sequence
 * regardless of what other streams have been used, which is what lets
 * replicates run on any worker in any order.
 *
 * Satisfies UniformRandomBitGenerator with 32-bit output.
 */
class Philox4x32
{
public:
    using result_type = std::uint32_t;
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t key = 0) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}
    {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (lane_ == 4) {
            block_ = bijection(counter_, key_);
            increment();
            lane_ = 0;
        }
        return block_[lane_++];
    }

    /// The raw 10-round bijection, exposed for known-answer tests.
    static counter_type bijection(counter_type ctr, key_type key) noexcept
    {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    void increment() noexcept
    {
        for (auto& c : counter_)
            if (++c != 0) break;
    }

    key_type key_;
    counter_type counter_{0, 0, 0, 0};
    counter_type block_{};
    int lane_ = 4;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of a sequence of words; used to derive stream keys.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (std::uint64_t x : parts) h = mix64(h ^ mix64(x));
    return h;
}

/// FNV-1a, for folding short tags (example names) into a key.
constexpr std::uint64_t tag_hash(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace tslasso
