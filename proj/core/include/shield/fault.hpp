// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "shield/bf16.hpp"
#include "shield/rng.hpp"

namespace shield {

/// Projection whose stored output words receive faults. Key and value
/// projections feed the persistent KV cache; query and output projections
/// feed the transient QO workspace. Anything else is left untouched.
enum class LayerKind { Query, Key, Value, Output, Other };

struct FaultSpec {
    double rho_kv = 0.0;  // per-element corruption probability for KV words
    double rho_qo = 0.0;  // per-element corruption probability for QO words
    SegmentMask mask = kMantissaSegment;
    std::uint64_t seed = 0;
};

/// Corruption probability a layer's stored output words receive.
double select_rho(LayerKind kind, const FaultSpec& spec);

/// Fault stream a layer draws from, derived from the run seed.
RandomStream layer_stream(std::uint64_t seed, LayerKind kind);

/// Per-element kernel. Element `index` of a tensor is corrupted with
/// probability rho by XOR-ing a fresh random pattern restricted to the mask.
/// Selection and pattern use separate counter slots, so whether one element
/// is corrupted never shifts the draws of any other element.
Bf16Word corrupt_word(Bf16Word w, double rho, SegmentMask mask, RandomStream stream,
                      std::uint64_t index);

/// Corrupted copy of a tensor. rho == 0 returns a bit-identical copy.
std::vector<Bf16Word> inject_tensor(std::span<const Bf16Word> data, double rho,
                                    SegmentMask mask, RandomStream stream);
std::vector<Bf16Word> inject_tensor(std::span<const Bf16Word> data, double rho,
                                    SegmentMask mask, std::uint64_t stream_seed);

/// Applies per-layer rates to a set of named tensors. Each layer draws from
/// its own stream, so adding or removing layers leaves the others' faults
/// unchanged.
std::map<LayerKind, std::vector<Bf16Word>> inject_by_layer(
    const std::map<LayerKind, std::vector<Bf16Word>>& tensors, const FaultSpec& spec);

}  // namespace shield
