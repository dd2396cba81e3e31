#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace sdns {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Random stream of one trajectory.
///
/// Every draw is a pure function of (seed, stream, step, mode), so a
/// trajectory can be replayed from any step and independent trajectories
/// (distinct stream ids) never share variates.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  ///< job index; only the low 32 bits enter the counter
    std::uint64_t step = 0;

    /// Two independent standard normals for `mode` at the current step.
    std::pair<double, double> normal_pair(std::uint32_t mode) const;
    void advance() { ++step; }

    friend bool operator==(const RngState&, const RngState&) = default;
};

}  // namespace sdns
