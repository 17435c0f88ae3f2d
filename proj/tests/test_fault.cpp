// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <doctest.h>

#include "shield/fault.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

std::vector<Bf16Word> zero_words(size_t n) { return std::vector<Bf16Word>(n, Bf16Word{0}); }

long long count_changed(const std::vector<Bf16Word>& a, const std::vector<Bf16Word>& b) {
    long long changed = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        changed += a[i] == b[i] ? 0 : 1;
    }
    return changed;
}

}  // namespace

TEST_CASE("rate validation") {
    const std::vector<Bf16Word> words = zero_words(4);
    CHECK_THROWS_AS(inject_tensor(words, -0.1, kMantissaSegment, uint64_t{1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(inject_tensor(words, 1.1, kMantissaSegment, uint64_t{1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(inject_tensor(words, std::nan(""), kMantissaSegment, uint64_t{1}),
                    std::invalid_argument);
}

TEST_CASE("zero rate is the identity") {
    std::vector<Bf16Word> words;
    const RandomStream fill = make_stream(7, 99);
    for (uint64_t i = 0; i < 1000; ++i) {
        words.push_back(Bf16Word{static_cast<uint16_t>(draw_u64(fill, i))});
    }
    const std::vector<Bf16Word> out = inject_tensor(words, 0.0, kMantissaSegment, uint64_t{1});
    CHECK(count_changed(words, out) == 0);
}

TEST_CASE("faults stay inside the mask") {
    std::vector<Bf16Word> words;
    const RandomStream fill = make_stream(11, 99);
    for (uint64_t i = 0; i < 1000; ++i) {
        words.push_back(Bf16Word{static_cast<uint16_t>(draw_u64(fill, i))});
    }
    for (const SegmentMask mask : {kMantissaSegment, kSignExponentSegment, SegmentMask{0x0F0F}}) {
        const std::vector<Bf16Word> out = inject_tensor(words, 1.0, mask, uint64_t{3});
        for (size_t i = 0; i < words.size(); ++i) {
            CHECK((static_cast<uint16_t>(words[i].bits ^ out[i].bits) & ~mask.bits) == 0);
        }
    }
}

TEST_CASE("injection is deterministic for a fixed stream") {
    const std::vector<Bf16Word> words = zero_words(4096);
    const std::vector<Bf16Word> a = inject_tensor(words, 0.25, kMantissaSegment, uint64_t{42});
    const std::vector<Bf16Word> b = inject_tensor(words, 0.25, kMantissaSegment, uint64_t{42});
    CHECK(a == b);
    const std::vector<Bf16Word> c = inject_tensor(words, 0.25, kMantissaSegment, uint64_t{43});
    CHECK(count_changed(a, c) > 0);
}

TEST_CASE("changed fraction tracks rho times the nonzero-pattern probability") {
    // A selected word is left unchanged only when the 7-bit pattern is zero,
    // so the change probability is rho * (1 - 2^-7).
    const size_t n = 200000;
    const std::vector<Bf16Word> words = zero_words(n);
    const std::vector<Bf16Word> out = inject_tensor(words, 0.25, kMantissaSegment, uint64_t{5});
    const double fraction =
        static_cast<double>(count_changed(words, out)) / static_cast<double>(n);
    const double expected = 0.25 * (1.0 - 1.0 / 128.0);
    const double four_sigma = 4.0 * std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::fabs(fraction - expected) < four_sigma);
}

TEST_CASE("select_rho routes by layer kind") {
    const FaultSpec spec{0.125, 0.5, kMantissaSegment, 9};
    CHECK(select_rho(LayerKind::Key, spec) == 0.125);
    CHECK(select_rho(LayerKind::Value, spec) == 0.125);
    CHECK(select_rho(LayerKind::Query, spec) == 0.5);
    CHECK(select_rho(LayerKind::Output, spec) == 0.5);
    CHECK(select_rho(LayerKind::Other, spec) == 0.0);
}

TEST_CASE("per-layer streams are independent") {
    const std::vector<Bf16Word> words = zero_words(4096);
    const std::vector<Bf16Word> k =
        inject_tensor(words, 0.25, kMantissaSegment, layer_stream(42, LayerKind::Key));
    const std::vector<Bf16Word> v =
        inject_tensor(words, 0.25, kMantissaSegment, layer_stream(42, LayerKind::Value));
    CHECK(count_changed(k, v) > 0);
}

TEST_CASE("inject_by_layer applies the configured rate per kind") {
    std::map<LayerKind, std::vector<Bf16Word>> tensors;
    tensors[LayerKind::Query] = zero_words(20000);
    tensors[LayerKind::Key] = zero_words(20000);
    tensors[LayerKind::Other] = zero_words(20000);
    const FaultSpec spec{0.0, 0.5, kMantissaSegment, 21};
    const auto out = inject_by_layer(tensors, spec);
    CHECK(count_changed(tensors.at(LayerKind::Key), out.at(LayerKind::Key)) == 0);
    CHECK(count_changed(tensors.at(LayerKind::Other), out.at(LayerKind::Other)) == 0);
    const long long q_changed =
        count_changed(tensors.at(LayerKind::Query), out.at(LayerKind::Query));
    CHECK(q_changed > 9000);
    CHECK(q_changed < 11000);
}

TEST_CASE("rho one changes every word whose pattern is nonzero") {
    const size_t n = 100000;
    const std::vector<Bf16Word> words = zero_words(n);
    const std::vector<Bf16Word> out = inject_tensor(words, 1.0, kMantissaSegment, uint64_t{17});
    const double fraction =
        static_cast<double>(count_changed(words, out)) / static_cast<double>(n);
    const double expected = 1.0 - 1.0 / 128.0;
    const double four_sigma = 4.0 * std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::fabs(fraction - expected) < four_sigma);
}
