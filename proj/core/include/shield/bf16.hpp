// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace shield {

/// One bfloat16 storage word.
/// Layout: bit 15 sign, bits 14..7 biased exponent, bits 6..0 mantissa.
struct Bf16Word {
    std::uint16_t bits = 0;

    constexpr bool operator==(const Bf16Word&) const = default;
};

/// Mantissa segment, bits 6..0.
inline constexpr std::uint16_t kMantissaMask = 0x007F;
/// Sign and exponent segment, bits 15..7.
inline constexpr std::uint16_t kSignExponentMask = 0xFF80;

static_assert((kMantissaMask & kSignExponentMask) == 0);
static_assert((kMantissaMask | kSignExponentMask) == 0xFFFF);

/// Bit subset of a storage word, used to restrict fault injection and to
/// split words across differently refreshed banks.
struct SegmentMask {
    std::uint16_t bits = kMantissaMask;

    constexpr bool operator==(const SegmentMask&) const = default;
};

inline constexpr SegmentMask kMantissaSegment{kMantissaMask};
inline constexpr SegmentMask kSignExponentSegment{kSignExponentMask};

/// Residency of a stored tensor: KV words persist across the whole context
/// window, QO words live only while the active layer computes.
enum class Residency { PersistentKv, TransientQo };

/// Refresh class of one stored bit. Sign and exponent bits always keep the
/// standard rate; mantissa bits inherit the residency of their tensor.
enum class SegmentClass { SignExponent, KvMantissa, QoMantissa };

constexpr SegmentClass segment_class_of_bit(unsigned bit_index, Residency residency) {
    if (bit_index > 15) {
        throw std::out_of_range("bit index outside a 16-bit word");
    }
    if (((1u << bit_index) & kSignExponentMask) != 0) {
        return SegmentClass::SignExponent;
    }
    return residency == Residency::PersistentKv ? SegmentClass::KvMantissa
                                                : SegmentClass::QoMantissa;
}

struct Bf16Fields {
    std::uint8_t sign = 0;      // 0 or 1
    std::uint8_t exponent = 0;  // biased, 0..255
    std::uint8_t mantissa = 0;  // 0..127

    constexpr bool operator==(const Bf16Fields&) const = default;
};

constexpr Bf16Fields decode(Bf16Word w) {
    return {static_cast<std::uint8_t>(w.bits >> 15),
            static_cast<std::uint8_t>((w.bits >> 7) & 0xFF),
            static_cast<std::uint8_t>(w.bits & kMantissaMask)};
}

constexpr Bf16Word encode(unsigned sign, unsigned exponent, unsigned mantissa) {
    if (sign > 1 || exponent > 255 || mantissa > 127) {
        throw std::invalid_argument("bfloat16 field out of range");
    }
    return Bf16Word{static_cast<std::uint16_t>((sign << 15) | (exponent << 7) | mantissa)};
}

/// Numeric value of a word. A bfloat16 word is the upper half of a binary32,
/// so widening by 16 zero bits reproduces the exact value, including
/// subnormals, infinities and NaNs.
constexpr float value_of(Bf16Word w) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(w.bits) << 16);
}

/// Nearest bfloat16 word for a binary32 value, ties to even.
/// NaN inputs map to the canonical quiet NaN with the input's sign.
constexpr Bf16Word bf16_from_float(float value) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(value);
    if ((u & 0x7FFFFFFFu) > 0x7F800000u) {
        return Bf16Word{static_cast<std::uint16_t>(((u >> 16) & 0x8000u) | 0x7FC0u)};
    }
    const std::uint32_t rounding_bias = ((u >> 16) & 1u) + 0x7FFFu;
    return Bf16Word{static_cast<std::uint16_t>((u + rounding_bias) >> 16)};
}

constexpr bool is_normal(Bf16Word w) {
    const auto e = decode(w).exponent;
    return e != 0 && e != 255;
}

/// Word split into the masked segment and the remainder.
/// kept | cleared reassembles the word; the two never share a set bit.
struct SegmentSplit {
    Bf16Word kept;
    Bf16Word cleared;

    constexpr bool operator==(const SegmentSplit&) const = default;
};

constexpr SegmentSplit apply_segment(Bf16Word w, SegmentMask m) {
    return {Bf16Word{static_cast<std::uint16_t>(w.bits & m.bits)},
            Bf16Word{static_cast<std::uint16_t>(w.bits & static_cast<std::uint16_t>(~m.bits))}};
}

}  // namespace shield
