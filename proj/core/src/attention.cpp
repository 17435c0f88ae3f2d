// SPDX-License-Identifier: Apache-2.0

#include "shield/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shield/rng.hpp"

namespace shield {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

constexpr uint64_t kQueryWeightTag = 10;
constexpr uint64_t kKeyWeightTag = 11;
constexpr uint64_t kValueWeightTag = 12;
constexpr uint64_t kInputTag = 13;

void require(bool ok, const char* msg) {
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

// Box-Muller on the counter stream; u1 is kept strictly positive so the log
// is always finite.
double standard_normal(const RandomStream& stream, uint64_t index) {
    const double u1 =
        (static_cast<double>(draw_u64(stream, 2 * index) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(draw_u64(stream, 2 * index + 1) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::vector<Bf16Word> gaussian_words(size_t count, double scale, const RandomStream& stream) {
    std::vector<Bf16Word> words(count);
    for (size_t i = 0; i < count; ++i) {
        words[i] = bf16_from_float(static_cast<float>(scale * standard_normal(stream, i)));
    }
    return words;
}

// Projects input (seq x model_dim) through per-head weights into one
// seq x model_dim tensor with head outputs side by side.
std::vector<Bf16Word> project(const AttentionDims& dims, const std::vector<Bf16Word>& input,
                              const std::vector<Bf16Word>& weights) {
    const long long seq = dims.seq_len;
    const long long d = dims.model_dim;
    const long long hd = dims.head_dim();
    std::vector<Bf16Word> out(static_cast<size_t>(seq * d));
    for (long long h = 0; h < dims.num_heads; ++h) {
        const size_t w_off = static_cast<size_t>(h * d * hd);
        for (long long i = 0; i < seq; ++i) {
            for (long long j = 0; j < hd; ++j) {
                double acc = 0.0;
                for (long long m = 0; m < d; ++m) {
                    acc += static_cast<double>(value_of(input[static_cast<size_t>(i * d + m)])) *
                           static_cast<double>(
                               value_of(weights[w_off + static_cast<size_t>(m * hd + j)]));
                }
                out[static_cast<size_t>(i * d + h * hd + j)] =
                    bf16_from_float(static_cast<float>(acc));
            }
        }
    }
    return out;
}

void apply_corruptor(const TensorCorruptor& corrupt, LayerKind kind,
                     std::vector<Bf16Word>& tensor) {
    if (corrupt) {
        corrupt(kind, tensor);
    }
}

struct TensorDiff {
    long long words = 0;
    long long changed = 0;
};

TensorDiff diff_tensors(const std::vector<Bf16Word>& clean, const std::vector<Bf16Word>& faulty,
                        PerturbationStats& stats) {
    TensorDiff d{static_cast<long long>(clean.size()), 0};
    for (size_t i = 0; i < clean.size(); ++i) {
        if (clean[i] == faulty[i]) {
            continue;
        }
        ++d.changed;
        if ((clean[i].bits & kSignExponentMask) != (faulty[i].bits & kSignExponentMask)) {
            stats.sign_exponent_preserved = false;
        }
        if (is_normal(clean[i])) {
            const double c = std::fabs(static_cast<double>(value_of(clean[i])));
            const double f = std::fabs(static_cast<double>(value_of(faulty[i])));
            if (!(f > 0.5 * c && f < 2.0 * c)) {
                stats.magnitude_ratio_bounded = false;
            }
        }
    }
    return d;
}

}  // namespace

void validate_dims(const AttentionDims& dims) {
    require(dims.seq_len >= 1, "sequence length must be positive");
    require(dims.model_dim >= 1, "model dimension must be positive");
    require(dims.num_heads >= 1, "head count must be positive");
    require(dims.model_dim % dims.num_heads == 0,
            "model dimension must be divisible by the head count");
}

AttentionWeights random_weights(const AttentionDims& dims, uint64_t seed) {
    validate_dims(dims);
    const size_t per_matrix =
        static_cast<size_t>(dims.num_heads * dims.model_dim * dims.head_dim());
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims.model_dim));
    AttentionWeights w;
    w.query = gaussian_words(per_matrix, scale, make_stream(seed, kQueryWeightTag));
    w.key = gaussian_words(per_matrix, scale, make_stream(seed, kKeyWeightTag));
    w.value = gaussian_words(per_matrix, scale, make_stream(seed, kValueWeightTag));
    return w;
}

std::vector<Bf16Word> random_input(const AttentionDims& dims, uint64_t seed) {
    validate_dims(dims);
    const size_t count = static_cast<size_t>(dims.seq_len * dims.model_dim);
    return gaussian_words(count, 1.0, make_stream(seed, kInputTag));
}

AttentionActivations attention_forward(const AttentionDims& dims,
                                       const AttentionWeights& weights,
                                       const std::vector<Bf16Word>& input,
                                       const TensorCorruptor& corrupt) {
    validate_dims(dims);
    const long long seq = dims.seq_len;
    const long long d = dims.model_dim;
    const long long hd = dims.head_dim();
    const size_t per_matrix = static_cast<size_t>(dims.num_heads * d * hd);
    require(input.size() == static_cast<size_t>(seq * d), "input shape mismatch");
    require(weights.query.size() == per_matrix && weights.key.size() == per_matrix &&
                weights.value.size() == per_matrix,
            "weight shape mismatch");

    AttentionActivations acts;
    acts.q = project(dims, input, weights.query);
    acts.k = project(dims, input, weights.key);
    acts.v = project(dims, input, weights.value);

    // Stored tensors take their faults before attention reads them back.
    apply_corruptor(corrupt, LayerKind::Query, acts.q);
    apply_corruptor(corrupt, LayerKind::Key, acts.k);
    apply_corruptor(corrupt, LayerKind::Value, acts.v);

    acts.output.assign(static_cast<size_t>(seq * d), Bf16Word{0});
    acts.probs.assign(static_cast<size_t>(dims.num_heads * seq * seq), 0.0);
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    std::vector<double> scores(static_cast<size_t>(seq));
    for (long long h = 0; h < dims.num_heads; ++h) {
        const long long col0 = h * hd;
        for (long long i = 0; i < seq; ++i) {
            for (long long j = 0; j < seq; ++j) {
                double acc = 0.0;
                for (long long t = 0; t < hd; ++t) {
                    acc += static_cast<double>(
                               value_of(acts.q[static_cast<size_t>(i * d + col0 + t)])) *
                           static_cast<double>(
                               value_of(acts.k[static_cast<size_t>(j * d + col0 + t)]));
                }
                scores[static_cast<size_t>(j)] = acc * inv_sqrt_hd;
            }
            // Softmax rows stay in double; only the attended values return to
            // BF16 storage.
            const double row_max = *std::max_element(scores.begin(), scores.end());
            double denom = 0.0;
            for (long long j = 0; j < seq; ++j) {
                scores[static_cast<size_t>(j)] = std::exp(scores[static_cast<size_t>(j)] - row_max);
                denom += scores[static_cast<size_t>(j)];
            }
            const size_t p_off = static_cast<size_t>((h * seq + i) * seq);
            for (long long j = 0; j < seq; ++j) {
                acts.probs[p_off + static_cast<size_t>(j)] =
                    scores[static_cast<size_t>(j)] / denom;
            }
            for (long long t = 0; t < hd; ++t) {
                double acc = 0.0;
                for (long long j = 0; j < seq; ++j) {
                    acc += acts.probs[p_off + static_cast<size_t>(j)] *
                           static_cast<double>(
                               value_of(acts.v[static_cast<size_t>(j * d + col0 + t)]));
                }
                acts.output[static_cast<size_t>(i * d + col0 + t)] =
                    bf16_from_float(static_cast<float>(acc));
            }
        }
    }

    apply_corruptor(corrupt, LayerKind::Output, acts.output);
    return acts;
}

FaultRunResult run_with_faults(const AttentionDims& dims, const AttentionWeights& weights,
                               const std::vector<Bf16Word>& input, const FaultSpec& spec) {
    const AttentionActivations clean = attention_forward(dims, weights, input);

    FaultRunResult result;
    PerturbationStats& st = result.stats;

    // Containment properties are judged at the injection site, on each stored
    // tensor immediately before and after its faults land; downstream output
    // drift is reported separately below.
    const TensorCorruptor corruptor = [&spec, &st](LayerKind kind,
                                                   std::vector<Bf16Word>& tensor) {
        const double rho = select_rho(kind, spec);
        const std::vector<Bf16Word> before = tensor;
        tensor = inject_tensor(tensor, rho, spec.mask, layer_stream(spec.seed, kind));
        const TensorDiff d = diff_tensors(before, tensor, st);
        switch (kind) {
            case LayerKind::Query:
                st.q_words = d.words;
                st.q_changed = d.changed;
                break;
            case LayerKind::Key:
                st.k_words = d.words;
                st.k_changed = d.changed;
                break;
            case LayerKind::Value:
                st.v_words = d.words;
                st.v_changed = d.changed;
                break;
            case LayerKind::Output:
                st.o_words = d.words;
                st.o_changed = d.changed;
                break;
            case LayerKind::Other:
                break;
        }
    };
    const AttentionActivations faulty = attention_forward(dims, weights, input, corruptor);

    result.output_clean = clean.output;
    result.output_faulty = faulty.output;

    const long long seq = dims.seq_len;
    for (long long h = 0; h < dims.num_heads; ++h) {
        for (long long i = 0; i < seq; ++i) {
            const size_t off = static_cast<size_t>((h * seq + i) * seq);
            double row_l1 = 0.0;
            for (long long j = 0; j < seq; ++j) {
                row_l1 += std::fabs(clean.probs[off + static_cast<size_t>(j)] -
                                    faulty.probs[off + static_cast<size_t>(j)]);
            }
            st.max_softmax_row_error = std::max(st.max_softmax_row_error, row_l1);
        }
    }

    double dot = 0.0;
    double norm_c = 0.0;
    double norm_f = 0.0;
    for (size_t i = 0; i < clean.output.size(); ++i) {
        const double c = static_cast<double>(value_of(clean.output[i]));
        const double f = static_cast<double>(value_of(faulty.output[i]));
        dot += c * f;
        norm_c += c * c;
        norm_f += f * f;
        const double rel = std::fabs(f - c) / std::max(std::fabs(c), 1e-30);
        st.max_rel_error = std::max(st.max_rel_error, rel);
    }
    const bool identical = faulty.output == clean.output;
    st.cosine_similarity =
        identical || norm_c == 0.0 || norm_f == 0.0
            ? 1.0
            : dot / (std::sqrt(norm_c) * std::sqrt(norm_f));
    return result;
}

}  // namespace shield
