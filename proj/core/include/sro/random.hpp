#pragma once

#include <array>
#include <cstdint>

namespace sro {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Deterministic stream of variates addressed by (seed, stream, index). Two
/// streams with different addresses never share a Philox block, so draws for
/// point k do not depend on how many points precede it or which thread runs.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t index);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sro
