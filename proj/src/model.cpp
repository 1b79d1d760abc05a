#include "pfrost/model.hpp"

#include <cmath>

#include "pfrost/error.hpp"
#include "pfrost/init.hpp"
#include "pfrost/rng.hpp"

namespace pfrost {

// ---- config -----------------------------------------------------------------

const char* to_string(Mode m) {
    return m == Mode::translation ? "translation" : "language_model";
}

Mode mode_from_string(const std::string& s) {
    if (s == "translation") return Mode::translation;
    if (s == "language_model") return Mode::language_model;
    throw ConfigError("unknown mode '" + s + "'");
}

void ModelConfig::validate() const {
    if (vocab_size < 2) throw ConfigError("config: vocab_size must be at least 2");
    if (d_model == 0) throw ConfigError("config: d_model must be positive");
    if (d_ff == 0) throw ConfigError("config: d_ff must be positive");
    if (n_heads == 0) throw ConfigError("config: n_heads must be positive");
    if (max_len == 0) throw ConfigError("config: max_len must be positive");
    if ((d_kq == 0 || d_v == 0) && d_model % n_heads != 0) {
        throw ConfigError("config: n_heads must divide d_model when per-head widths "
                          "are defaulted");
    }
    if (mode == Mode::language_model) {
        if (n_enc_layers != 0) {
            throw ConfigError("config: language_model mode requires n_enc_layers == 0");
        }
        if (n_dec_layers == 0) {
            throw ConfigError("config: language_model mode requires decoder layers");
        }
    } else {
        if (n_enc_layers == 0 || n_dec_layers == 0) {
            throw ConfigError("config: translation mode requires encoder and decoder layers");
        }
    }
}

// ---- tags ---------------------------------------------------------------------

const char* to_string(Group g) {
    switch (g) {
        case Group::EMB: return "EMB";
        case Group::ATT: return "ATT";
        case Group::FFN: return "FFN";
        default: return "OTHER";
    }
}

const char* to_string(Side s) {
    switch (s) {
        case Side::encoder: return "encoder";
        case Side::decoder: return "decoder";
        default: return "shared";
    }
}

const char* to_string(AttKind k) { return k == AttKind::self ? "self" : "context"; }

const char* to_string(MatrixRole r) {
    switch (r) {
        case MatrixRole::query: return "query";
        case MatrixRole::key: return "key";
        case MatrixRole::value: return "value";
        case MatrixRole::output: return "output";
        case MatrixRole::ffn_in: return "ffn_in";
        case MatrixRole::ffn_out: return "ffn_out";
        case MatrixRole::norm_gain: return "norm_gain";
        case MatrixRole::norm_bias: return "norm_bias";
        default: return "bias";
    }
}

void ComponentTag::validate() const {
    if ((group == Group::ATT) != att_kind.has_value()) {
        throw ConfigError("tag: att_kind must be present exactly for ATT parameters");
    }
    if (att_kind == AttKind::context && side != Side::decoder) {
        throw ConfigError("tag: context attention only exists in the decoder");
    }
}

std::string ComponentTag::describe() const {
    std::string s = to_string(group);
    s += "/";
    s += to_string(side);
    if (att_kind) {
        s += "/";
        s += to_string(*att_kind);
    }
    if (layer_index) s += "/l" + std::to_string(*layer_index);
    if (matrix_role) {
        s += "/";
        s += to_string(*matrix_role);
    }
    return s;
}

void Parameter::set_trainable(bool v) {
    trainable = v;
    if (tensor.defined()) tensor.set_requires_grad(v);
}

Parameter& ParameterRegistry::add(Parameter p) {
    p.tag.validate();
    if (index_.count(p.name)) {
        throw ConfigError("registry: duplicate parameter name '" + p.name + "'");
    }
    index_[p.name] = params_.size();
    params_.push_back(std::move(p));
    return params_.back();
}

bool ParameterRegistry::contains(const std::string& name) const {
    return index_.count(name) != 0;
}

Parameter& ParameterRegistry::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("registry: unknown parameter '" + name + "'");
    return params_[it->second];
}

const Parameter& ParameterRegistry::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("registry: unknown parameter '" + name + "'");
    return params_[it->second];
}

size_t ParameterRegistry::total_count() const {
    size_t n = 0;
    for (const auto& p : params_) n += p.numel();
    return n;
}

size_t ParameterRegistry::trainable_count() const {
    size_t n = 0;
    for (const auto& p : params_) {
        if (p.trainable) n += p.numel();
    }
    return n;
}

size_t ParameterRegistry::group_count(Group g) const {
    size_t n = 0;
    for (const auto& p : params_) {
        if (p.tag.group == g) n += p.numel();
    }
    return n;
}

// ---- builder --------------------------------------------------------------------

namespace {

ComponentTag att_tag(Side side, AttKind kind, int layer, MatrixRole role) {
    ComponentTag t;
    t.group = Group::ATT;
    t.side = side;
    t.att_kind = kind;
    t.layer_index = layer;
    t.matrix_role = role;
    return t;
}

ComponentTag ffn_tag(Side side, int layer, MatrixRole role) {
    ComponentTag t;
    t.group = Group::FFN;
    t.side = side;
    t.layer_index = layer;
    t.matrix_role = role;
    return t;
}

ComponentTag other_tag(Side side, std::optional<int> layer, MatrixRole role) {
    ComponentTag t;
    t.group = Group::OTHER;
    t.side = side;
    t.layer_index = layer;
    t.matrix_role = role;
    return t;
}

// Emits parameters either with Glorot-initialized storage or as pure
// metadata; both paths walk the identical structure, so the registry used
// for counting is the registry the model trains with.
struct Emitter {
    ParameterRegistry& reg;
    bool materialize;
    uint64_t seed;

    Tensor matrix(const std::string& name, size_t r, size_t c, ComponentTag tag) {
        Parameter p;
        p.name = name;
        p.shape = {r, c};
        p.tag = tag;
        if (materialize) {
            p.tensor = glorot_init(r, c, mix_seed(seed, name));
            p.tensor.set_requires_grad(true);
        }
        return reg.add(std::move(p)).tensor;
    }

    Tensor vector(const std::string& name, size_t n, double value, ComponentTag tag) {
        Parameter p;
        p.name = name;
        p.shape = {n};
        p.tag = tag;
        if (materialize) {
            p.tensor = Tensor::full({n}, value, true);
        }
        return reg.add(std::move(p)).tensor;
    }
};

struct BuiltAttention {
    AttentionParams params;
};

AttentionParams emit_attention(Emitter& em, const std::string& prefix, Side side,
                               AttKind kind, int layer, const ModelConfig& cfg) {
    AttentionParams a;
    a.n_heads = cfg.n_heads;
    a.d_kq = cfg.head_kq();
    a.d_v = cfg.head_v();
    const size_t d = cfg.d_model;
    a.wq = em.matrix(prefix + ".wq", d, cfg.kq_total(), att_tag(side, kind, layer, MatrixRole::query));
    a.wk = em.matrix(prefix + ".wk", d, cfg.kq_total(), att_tag(side, kind, layer, MatrixRole::key));
    a.wv = em.matrix(prefix + ".wv", d, cfg.v_total(), att_tag(side, kind, layer, MatrixRole::value));
    a.wo = em.matrix(prefix + ".wo", cfg.v_total(), d, att_tag(side, kind, layer, MatrixRole::output));
    a.bq = em.vector(prefix + ".bq", cfg.kq_total(), 0.0, other_tag(side, layer, MatrixRole::bias));
    a.bk = em.vector(prefix + ".bk", cfg.kq_total(), 0.0, other_tag(side, layer, MatrixRole::bias));
    a.bv = em.vector(prefix + ".bv", cfg.v_total(), 0.0, other_tag(side, layer, MatrixRole::bias));
    a.bo = em.vector(prefix + ".bo", d, 0.0, other_tag(side, layer, MatrixRole::bias));
    return a;
}

FfnParams emit_ffn(Emitter& em, const std::string& prefix, Side side, int layer,
                   const ModelConfig& cfg) {
    FfnParams f;
    f.w1 = em.matrix(prefix + ".w1", cfg.d_ff, cfg.d_model, ffn_tag(side, layer, MatrixRole::ffn_in));
    f.w2 = em.matrix(prefix + ".w2", cfg.d_model, cfg.d_ff, ffn_tag(side, layer, MatrixRole::ffn_out));
    f.b1 = em.vector(prefix + ".b1", cfg.d_ff, 0.0, other_tag(side, layer, MatrixRole::bias));
    f.b2 = em.vector(prefix + ".b2", cfg.d_model, 0.0, other_tag(side, layer, MatrixRole::bias));
    return f;
}

NormParams emit_norm(Emitter& em, const std::string& prefix, Side side,
                     std::optional<int> layer, const ModelConfig& cfg) {
    NormParams n;
    n.gain = em.vector(prefix + ".gain", cfg.d_model, 1.0, other_tag(side, layer, MatrixRole::norm_gain));
    n.bias = em.vector(prefix + ".bias", cfg.d_model, 0.0, other_tag(side, layer, MatrixRole::norm_bias));
    return n;
}

Tensor build_pos_table(const ModelConfig& cfg) {
    Tensor pe = Tensor::zeros({cfg.max_len, cfg.d_model});
    const size_t d = cfg.d_model;
    for (size_t pos = 0; pos < cfg.max_len; ++pos) {
        for (size_t i = 0; i < d; i += 2) {
            const double angle = static_cast<double>(pos) /
                                 std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
            pe.data()[pos * d + i] = std::sin(angle);
            if (i + 1 < d) pe.data()[pos * d + i + 1] = std::cos(angle);
        }
    }
    return pe;
}

}  // namespace

// ---- multi-head attention ---------------------------------------------------------

Tensor multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                            const AttentionParams& p, const AttnMask* mask) {
    if (mask && (mask->rows != q_in.rows() || mask->cols != k_in.rows())) {
        throw ShapeError("attention: mask shape [" + std::to_string(mask->rows) + "," +
                         std::to_string(mask->cols) + "] does not match query/key lengths [" +
                         std::to_string(q_in.rows()) + "," + std::to_string(k_in.rows()) + "]");
    }
    const Tensor q = add_row(matmul(q_in, p.wq), p.bq);  // [tq, H*dkq]
    const Tensor k = add_row(matmul(k_in, p.wk), p.bk);  // [tk, H*dkq]
    const Tensor v = add_row(matmul(v_in, p.wv), p.bv);  // [tk, H*dv]
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(p.d_kq));
    std::vector<Tensor> heads;
    heads.reserve(p.n_heads);
    for (size_t h = 0; h < p.n_heads; ++h) {
        const Tensor qh = col_slice(q, h * p.d_kq, p.d_kq);
        const Tensor kh = col_slice(k, h * p.d_kq, p.d_kq);
        const Tensor vh = col_slice(v, h * p.d_v, p.d_v);
        const Tensor scores = scale(matmul_nt(qh, kh), inv_sqrt);  // [tq, tk]
        const Tensor att = softmax_rows(scores, mask);
        heads.push_back(matmul(att, vh));  // [tq, dv]
    }
    return add_row(matmul(concat_cols(heads), p.wo), p.bo);
}

// ---- model ---------------------------------------------------------------------------

TransformerModel::TransformerModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Emitter em{registry_, /*materialize=*/true, seed};

    ComponentTag emb_tag;
    emb_tag.group = Group::EMB;
    emb_tag.side = Side::shared;
    embedding_ = em.matrix("emb.shared", cfg_.vocab_size, cfg_.d_model, emb_tag);

    for (size_t l = 0; l < cfg_.n_enc_layers; ++l) {
        const std::string base = "enc.l" + std::to_string(l);
        EncoderLayer layer;
        layer.att_norm = emit_norm(em, base + ".self_norm", Side::encoder, int(l), cfg_);
        layer.self_att = emit_attention(em, base + ".self", Side::encoder, AttKind::self, int(l), cfg_);
        layer.ffn_norm = emit_norm(em, base + ".ffn_norm", Side::encoder, int(l), cfg_);
        layer.ffn = emit_ffn(em, base + ".ffn", Side::encoder, int(l), cfg_);
        enc_.push_back(std::move(layer));
    }
    if (cfg_.n_enc_layers > 0) {
        enc_final_ = emit_norm(em, "enc.final_norm", Side::encoder, std::nullopt, cfg_);
    }

    for (size_t l = 0; l < cfg_.n_dec_layers; ++l) {
        const std::string base = "dec.l" + std::to_string(l);
        DecoderLayer layer;
        layer.self_norm = emit_norm(em, base + ".self_norm", Side::decoder, int(l), cfg_);
        layer.self_att = emit_attention(em, base + ".self", Side::decoder, AttKind::self, int(l), cfg_);
        if (cfg_.mode == Mode::translation) {
            layer.ctx_norm = emit_norm(em, base + ".ctx_norm", Side::decoder, int(l), cfg_);
            layer.ctx_att = emit_attention(em, base + ".ctx", Side::decoder, AttKind::context, int(l), cfg_);
        }
        layer.ffn_norm = emit_norm(em, base + ".ffn_norm", Side::decoder, int(l), cfg_);
        layer.ffn = emit_ffn(em, base + ".ffn", Side::decoder, int(l), cfg_);
        dec_.push_back(std::move(layer));
    }
    dec_final_ = emit_norm(em, "dec.final_norm", Side::decoder, std::nullopt, cfg_);

    pos_table_ = build_pos_table(cfg_);
}

ParameterRegistry TransformerModel::build_registry(const ModelConfig& cfg) {
    cfg.validate();
    ParameterRegistry reg;
    Emitter em{reg, /*materialize=*/false, 0};

    ComponentTag emb_tag;
    emb_tag.group = Group::EMB;
    emb_tag.side = Side::shared;
    em.matrix("emb.shared", cfg.vocab_size, cfg.d_model, emb_tag);

    for (size_t l = 0; l < cfg.n_enc_layers; ++l) {
        const std::string base = "enc.l" + std::to_string(l);
        emit_norm(em, base + ".self_norm", Side::encoder, int(l), cfg);
        emit_attention(em, base + ".self", Side::encoder, AttKind::self, int(l), cfg);
        emit_norm(em, base + ".ffn_norm", Side::encoder, int(l), cfg);
        emit_ffn(em, base + ".ffn", Side::encoder, int(l), cfg);
    }
    if (cfg.n_enc_layers > 0) emit_norm(em, "enc.final_norm", Side::encoder, std::nullopt, cfg);

    for (size_t l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string base = "dec.l" + std::to_string(l);
        emit_norm(em, base + ".self_norm", Side::decoder, int(l), cfg);
        emit_attention(em, base + ".self", Side::decoder, AttKind::self, int(l), cfg);
        if (cfg.mode == Mode::translation) {
            emit_norm(em, base + ".ctx_norm", Side::decoder, int(l), cfg);
            emit_attention(em, base + ".ctx", Side::decoder, AttKind::context, int(l), cfg);
        }
        emit_norm(em, base + ".ffn_norm", Side::decoder, int(l), cfg);
        emit_ffn(em, base + ".ffn", Side::decoder, int(l), cfg);
    }
    emit_norm(em, "dec.final_norm", Side::decoder, std::nullopt, cfg);
    return reg;
}

Tensor TransformerModel::embed(std::span<const int> ids) const {
    if (ids.size() > cfg_.max_len) {
        throw ConfigError("sequence length " + std::to_string(ids.size()) +
                          " exceeds max_len " + std::to_string(cfg_.max_len));
    }
    std::vector<int> v(ids.begin(), ids.end());
    Tensor x = scale(embedding_rows(embedding_, v),
                     std::sqrt(static_cast<double>(cfg_.d_model)));
    // positional rows as a constant (never trained, never frozen)
    Tensor pos = Tensor::zeros({ids.size(), cfg_.d_model});
    std::copy(pos_table_.data().begin(),
              pos_table_.data().begin() + ids.size() * cfg_.d_model, pos.data().begin());
    return add(x, pos);
}

Tensor TransformerModel::ffn_forward(const FfnParams& p, const Tensor& x) const {
    const Tensor h = relu(add_row(matmul_nt(x, p.w1), p.b1));
    return add_row(matmul_nt(h, p.w2), p.b2);
}

Tensor TransformerModel::encode(std::span<const int> src) const {
    if (cfg_.mode != Mode::translation) {
        throw ConfigError("encode: model is not in translation mode");
    }
    Tensor x = embed(src);
    for (const auto& layer : enc_) {
        Tensor h = layer_norm(x, layer.att_norm.gain, layer.att_norm.bias);
        x = add(x, multi_head_attention(h, h, h, layer.self_att, nullptr));
        h = layer_norm(x, layer.ffn_norm.gain, layer.ffn_norm.bias);
        x = add(x, ffn_forward(layer.ffn, h));
    }
    return layer_norm(x, enc_final_.gain, enc_final_.bias);
}

Tensor TransformerModel::decode_with_memory(const Tensor& memory,
                                            std::span<const int> tgt_in) const {
    const AttnMask causal = AttnMask::causal(tgt_in.size());
    Tensor x = embed(tgt_in);
    for (const auto& layer : dec_) {
        Tensor h = layer_norm(x, layer.self_norm.gain, layer.self_norm.bias);
        x = add(x, multi_head_attention(h, h, h, layer.self_att, &causal));
        if (cfg_.mode == Mode::translation) {
            h = layer_norm(x, layer.ctx_norm.gain, layer.ctx_norm.bias);
            x = add(x, multi_head_attention(h, memory, memory, layer.ctx_att, nullptr));
        }
        h = layer_norm(x, layer.ffn_norm.gain, layer.ffn_norm.bias);
        x = add(x, ffn_forward(layer.ffn, h));
    }
    x = layer_norm(x, dec_final_.gain, dec_final_.bias);
    return matmul_nt(x, embedding_);  // tied output projection, no bias
}

Tensor TransformerModel::forward_seq2seq(std::span<const int> src,
                                         std::span<const int> tgt_in) const {
    return decode_with_memory(encode(src), tgt_in);
}

Tensor TransformerModel::forward_lm(std::span<const int> tokens) const {
    if (cfg_.mode != Mode::language_model) {
        throw ConfigError("forward_lm: model is not in language_model mode");
    }
    return decode_with_memory(Tensor(), tokens);
}

}  // namespace pfrost
