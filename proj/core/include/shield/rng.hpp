// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace shield {

// Counter-based generator: every draw is a pure function of (stream, counter),
// so results do not depend on evaluation order and partitioned work can draw
// from disjoint counter ranges without coordination.

/// Derived, order-independent source of 64-bit draws.
struct RandomStream {
    std::uint64_t base = 0;

    constexpr bool operator==(const RandomStream&) const = default;
};

namespace detail {
inline constexpr std::uint64_t kWeylIncrement = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}
}  // namespace detail

/// Independent stream for (seed, tag). Distinct tags under one seed yield
/// distinct stream bases; the mix is bijective.
constexpr RandomStream make_stream(std::uint64_t seed, std::uint64_t tag) {
    return {detail::mix64(seed + detail::kWeylIncrement * (tag + 1))};
}

/// counter-th 64-bit draw of a stream.
constexpr std::uint64_t draw_u64(RandomStream s, std::uint64_t counter) {
    return detail::mix64(s.base + detail::kWeylIncrement * (counter + 1));
}

/// Uniform [0, 1) from the top 53 bits of a draw.
constexpr double to_unit_interval(std::uint64_t r) {
    return static_cast<double>(r >> 11) * 0x1.0p-53;
}

}  // namespace shield
