#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace trigcm {

// Philox4x32-10 block: 128-bit counter, 64-bit key -> four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Stable 64-bit stream id from a label and indices (FNV-1a over the bytes).
std::uint64_t stream_id(std::string_view label, std::initializer_list<std::uint64_t> indices = {});

// Counter-based generator. The full state is (seed, stream, counter), so a
// generator can be re-created at any position without replaying draws.
class Rng {
   public:
    struct State {
        std::uint64_t seed = 0;
        std::uint64_t stream = 0;
        std::uint64_t counter = 0;  // 32-bit words consumed
    };

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
    explicit Rng(State state);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller; consumes exactly 128 bits per draw.
    double normal();
    double normal(double mean, double stddev);
    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);

    State state() const { return state_; }

   private:
    State state_;
};

}  // namespace trigcm
