#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>

#include "fdqn/errors.hpp"

namespace fdqn {

// Seeded random stream. mt19937_64 gives an implementation-pinned integer
// sequence; the float/int helpers below derive values from raw bits only, so
// streams are bit-identical across platforms and standard libraries (the
// <random> distribution classes carry no such guarantee).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    float uniform_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

    float uniform_float(float lo, float hi) { return lo + (hi - lo) * uniform_float(); }

    // Uniform integer in [0, n). Masked rejection keeps it unbiased.
    int uniform_int(int n) {
        if (n <= 0) throw ContractViolation("uniform_int: n must be positive");
        const auto range = static_cast<std::uint64_t>(n);
        const std::uint64_t mask = std::bit_ceil(range) - 1;
        for (;;) {
            const std::uint64_t v = next_u64() & mask;
            if (v < range) return static_cast<int>(v);
        }
    }

  private:
    std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent sub-seed from a master seed and a stream label.
// FNV-1a over the label, folded with the master seed, then finalized with
// splitmix64. Changing one consumer's draw count never perturbs another
// stream because every consumer owns its own Rng built from a derived seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return detail::splitmix64(h);
}

inline Rng make_stream(std::uint64_t master, std::string_view label) {
    return Rng(derive_seed(master, label));
}

}  // namespace fdqn
