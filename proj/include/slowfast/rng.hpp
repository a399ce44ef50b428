#pragma once

#include <array>
#include <cstdint>

namespace slowfast {

// Philox4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so trial i of a Monte Carlo run can be generated on any
// worker in any order and still produce the same stream.
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t key, std::uint64_t counter_hi)
        : key_{static_cast<std::uint32_t>(key),
               static_cast<std::uint32_t>(key >> 32)},
          ctr_{0, 0,
               static_cast<std::uint32_t>(counter_hi),
               static_cast<std::uint32_t>(counter_hi >> 32)},
          idx_(4) {}

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            block_ = round10(ctr_, key_);
            // 128-bit counter increment on the low words
            if (++ctr_[0] == 0) ++ctr_[1];
            idx_ = 0;
        }
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> round10(std::array<std::uint32_t, 4> c,
                                                std::array<std::uint32_t, 2> k) {
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int idx_;
};

// Stateless mixing for deriving sub-seeds (per-epsilon sweep seeds etc).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace slowfast
