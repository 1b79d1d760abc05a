#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pfrost/config.hpp"
#include "pfrost/tag.hpp"
#include "pfrost/tensor.hpp"

namespace pfrost {

// One attention module's projections. Wq/Wk: [d_model, n_heads*d_kq],
// Wv: [d_model, n_heads*d_v], Wo: [n_heads*d_v, d_model].
struct AttentionParams {
    Tensor wq, wk, wv, wo;
    Tensor bq, bk, bv, bo;
    size_t n_heads = 0;
    size_t d_kq = 0;
    size_t d_v = 0;
};

// Position-wise feed-forward weights, stored [out, in]: W1: [d_ff, d_model],
// W2: [d_model, d_ff].
struct FfnParams {
    Tensor w1, w2, b1, b2;
};

struct NormParams {
    Tensor gain, bias;
};

// Scaled dot-product attention over n_heads, concatenated and projected.
// q_in: [tq, d_model], k_in/v_in: [tk, d_model]; mask, when given, is
// [tq, tk].
Tensor multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                            const AttentionParams& p, const AttnMask* mask = nullptr);

// The transformer. Encoder-decoder in translation mode, decoder-only (no
// context attention) in language-model mode. The single embedding matrix
// serves source lookup, target lookup and the output projection.
class TransformerModel {
public:
    // Builds and Glorot-initializes all parameters. Rebuilding with the same
    // seed yields bit-identical parameters.
    TransformerModel(const ModelConfig& cfg, uint64_t seed);

    // Registry with names, shapes and tags but no tensor storage; used for
    // full-scale parameter accounting where materializing 200M doubles
    // would be pointless.
    static ParameterRegistry build_registry(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    ParameterRegistry& registry() { return registry_; }
    const ParameterRegistry& registry() const { return registry_; }

    // Teacher-forced forward passes returning logits [t, vocab].
    Tensor forward_seq2seq(std::span<const int> src, std::span<const int> tgt_in) const;
    Tensor forward_lm(std::span<const int> tokens) const;

    // Encoder output for incremental decoding.
    Tensor encode(std::span<const int> src) const;
    Tensor decode_with_memory(const Tensor& memory, std::span<const int> tgt_in) const;

private:
    struct EncoderLayer {
        NormParams att_norm;
        AttentionParams self_att;
        NormParams ffn_norm;
        FfnParams ffn;
    };
    struct DecoderLayer {
        NormParams self_norm;
        AttentionParams self_att;
        NormParams ctx_norm;
        AttentionParams ctx_att;  // undefined tensors in LM mode
        NormParams ffn_norm;
        FfnParams ffn;
    };

    ModelConfig cfg_;
    ParameterRegistry registry_;
    Tensor embedding_;  // [vocab, d_model]
    std::vector<EncoderLayer> enc_;
    std::vector<DecoderLayer> dec_;
    NormParams enc_final_;
    NormParams dec_final_;
    Tensor pos_table_;  // [max_len, d_model], sinusoidal, not a parameter

    Tensor embed(std::span<const int> ids) const;
    Tensor ffn_forward(const FfnParams& p, const Tensor& x) const;
};

}  // namespace pfrost
