// SPDX-License-Identifier: Apache-2.0
//
// A small multi-head attention block over BF16 storage. Arithmetic runs in
// double; every tensor that would live in the activation workspace (Q, K, V,
// per-head outputs) is materialized as BF16 words, so stored-bit corruption
// feeds through exactly as it would in the array.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shield/bf16.hpp"
#include "shield/fault.hpp"

namespace shield {

struct AttentionDims {
    long long seq_len = 0;
    long long model_dim = 0;
    long long num_heads = 0;

    long long head_dim() const { return model_dim / num_heads; }
};

void validate_dims(const AttentionDims& dims);

// Per-head projection weights, each num_heads * model_dim * head_dim words,
// head-major. There is no output projection; the block returns concatenated
// head outputs.
struct AttentionWeights {
    std::vector<Bf16Word> query;
    std::vector<Bf16Word> key;
    std::vector<Bf16Word> value;
};

AttentionWeights random_weights(const AttentionDims& dims, uint64_t seed);
std::vector<Bf16Word> random_input(const AttentionDims& dims, uint64_t seed);

// Called on each stored tensor right after it is written and before its next
// use, mirroring a residency window in the array.
using TensorCorruptor = std::function<void(LayerKind, std::vector<Bf16Word>&)>;

struct AttentionActivations {
    std::vector<Bf16Word> q;       // seq_len * model_dim, heads concatenated
    std::vector<Bf16Word> k;
    std::vector<Bf16Word> v;
    std::vector<Bf16Word> output;  // seq_len * model_dim
    std::vector<double> probs;     // num_heads * seq_len * seq_len softmax rows
};

AttentionActivations attention_forward(const AttentionDims& dims,
                                       const AttentionWeights& weights,
                                       const std::vector<Bf16Word>& input,
                                       const TensorCorruptor& corrupt = {});

struct PerturbationStats {
    long long q_words = 0, q_changed = 0;
    long long k_words = 0, k_changed = 0;
    long long v_words = 0, v_changed = 0;
    long long o_words = 0, o_changed = 0;
    // True when every changed word kept its sign and exponent bits.
    bool sign_exponent_preserved = true;
    // True when every changed word with a normal pre-fault value stayed within
    // a factor of two of it in magnitude.
    bool magnitude_ratio_bounded = true;
    double max_softmax_row_error = 0.0;  // max over rows of the L1 probability gap
    double max_rel_error = 0.0;          // elementwise on the block output
    double cosine_similarity = 1.0;      // clean output vs faulty output
};

struct FaultRunResult {
    std::vector<Bf16Word> output_clean;
    std::vector<Bf16Word> output_faulty;
    PerturbationStats stats;
};

// Runs the block twice on identical inputs, once clean and once with stored
// tensors corrupted per `spec`, and reports how far the outputs moved.
FaultRunResult run_with_faults(const AttentionDims& dims, const AttentionWeights& weights,
                               const std::vector<Bf16Word>& input, const FaultSpec& spec);

}  // namespace shield
