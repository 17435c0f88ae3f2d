// SPDX-License-Identifier: Apache-2.0

#include "shield/fault.hpp"

#include <stdexcept>

namespace shield {

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("corruption probability must lie in [0, 1]");
    }
}

constexpr std::uint64_t stream_tag(LayerKind kind) {
    switch (kind) {
        case LayerKind::Query: return 1;
        case LayerKind::Key: return 2;
        case LayerKind::Value: return 3;
        case LayerKind::Output: return 4;
        case LayerKind::Other: return 5;
    }
    throw std::invalid_argument("unknown layer kind");
}

}  // namespace

double select_rho(LayerKind kind, const FaultSpec& spec) {
    switch (kind) {
        case LayerKind::Key:
        case LayerKind::Value:
            return spec.rho_kv;
        case LayerKind::Query:
        case LayerKind::Output:
            return spec.rho_qo;
        case LayerKind::Other:
            return 0.0;
    }
    throw std::invalid_argument("unknown layer kind");
}

RandomStream layer_stream(std::uint64_t seed, LayerKind kind) {
    return make_stream(seed, stream_tag(kind));
}

Bf16Word corrupt_word(Bf16Word w, double rho, SegmentMask mask, RandomStream stream,
                      std::uint64_t index) {
    const double u = to_unit_interval(draw_u64(stream, 2 * index));
    if (!(u < rho)) {
        return w;
    }
    const auto pattern =
        static_cast<std::uint16_t>(draw_u64(stream, 2 * index + 1) & mask.bits);
    return Bf16Word{static_cast<std::uint16_t>(w.bits ^ pattern)};
}

std::vector<Bf16Word> inject_tensor(std::span<const Bf16Word> data, double rho,
                                    SegmentMask mask, RandomStream stream) {
    check_rho(rho);
    std::vector<Bf16Word> out(data.begin(), data.end());
    if (rho == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = corrupt_word(out[i], rho, mask, stream, i);
    }
    return out;
}

std::vector<Bf16Word> inject_tensor(std::span<const Bf16Word> data, double rho,
                                    SegmentMask mask, std::uint64_t stream_seed) {
    return inject_tensor(data, rho, mask, make_stream(stream_seed, 0));
}

std::map<LayerKind, std::vector<Bf16Word>> inject_by_layer(
    const std::map<LayerKind, std::vector<Bf16Word>>& tensors, const FaultSpec& spec) {
    check_rho(spec.rho_kv);
    check_rho(spec.rho_qo);
    std::map<LayerKind, std::vector<Bf16Word>> out;
    for (const auto& [kind, words] : tensors) {
        out.emplace(kind, inject_tensor(words, select_rho(kind, spec), spec.mask,
                                        layer_stream(spec.seed, kind)));
    }
    return out;
}

}  // namespace shield
