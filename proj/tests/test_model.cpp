#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pfrost/checkpoint.hpp"
#include "pfrost/error.hpp"
#include "pfrost/model.hpp"
#include "pfrost/rng.hpp"

using namespace pfrost;

namespace {

ModelConfig toy_config(size_t vocab = 10, size_t d = 8, size_t ff = 16, size_t heads = 2,
                       size_t enc = 1, size_t dec = 1) {
    ModelConfig c;
    c.vocab_size = vocab;
    c.d_model = d;
    c.d_ff = ff;
    c.n_heads = heads;
    c.n_enc_layers = enc;
    c.n_dec_layers = dec;
    c.max_len = 32;
    return c;
}

// ---- straight-line reimplementation on plain vectors -------------------------
// Reads weights from the registry by name and recomputes the whole forward
// pass with nested loops; shares no code with the library.

using Mat = std::vector<std::vector<double>>;

Mat get2d(const ParameterRegistry& reg, const std::string& name) {
    const Parameter& p = reg.at(name);
    Mat m(p.shape[0], std::vector<double>(p.shape.size() > 1 ? p.shape[1] : 1));
    for (size_t r = 0; r < p.shape[0]; ++r) {
        for (size_t c = 0; c < m[r].size(); ++c) {
            m[r][c] = p.tensor.data()[r * m[r].size() + c];
        }
    }
    return m;
}

std::vector<double> get1d(const ParameterRegistry& reg, const std::string& name) {
    return reg.at(name).tensor.data();
}

Mat embed_oracle(const ParameterRegistry& reg, const std::vector<int>& ids, size_t d) {
    const Mat emb = get2d(reg, "emb.shared");
    Mat x(ids.size(), std::vector<double>(d));
    for (size_t t = 0; t < ids.size(); ++t) {
        for (size_t c = 0; c < d; ++c) {
            double pe;
            if (c % 2 == 0) {
                pe = std::sin(t / std::pow(10000.0, double(c) / double(d)));
            } else {
                pe = std::cos(t / std::pow(10000.0, double(c - 1) / double(d)));
            }
            x[t][c] = emb[ids[t]][c] * std::sqrt(double(d)) + pe;
        }
    }
    return x;
}

Mat norm_oracle(const Mat& x, const std::vector<double>& g, const std::vector<double>& b) {
    const size_t d = g.size();
    Mat y(x.size(), std::vector<double>(d));
    for (size_t t = 0; t < x.size(); ++t) {
        double mu = 0;
        for (double v : x[t]) mu += v;
        mu /= d;
        double var = 0;
        for (double v : x[t]) var += (v - mu) * (v - mu);
        var /= d;
        const double inv = 1.0 / std::sqrt(var + 1e-6);
        for (size_t c = 0; c < d; ++c) y[t][c] = (x[t][c] - mu) * inv * g[c] + b[c];
    }
    return y;
}

Mat attention_oracle(const ParameterRegistry& reg, const std::string& prefix, const Mat& q_in,
                     const Mat& kv_in, size_t heads, size_t dkq, size_t dv, bool causal) {
    const Mat wq = get2d(reg, prefix + ".wq"), wk = get2d(reg, prefix + ".wk");
    const Mat wv = get2d(reg, prefix + ".wv"), wo = get2d(reg, prefix + ".wo");
    const auto bq = get1d(reg, prefix + ".bq"), bk = get1d(reg, prefix + ".bk");
    const auto bv = get1d(reg, prefix + ".bv"), bo = get1d(reg, prefix + ".bo");
    const size_t tq = q_in.size(), tk = kv_in.size(), d = q_in[0].size();

    auto project = [&](const Mat& in, const Mat& w, const std::vector<double>& bias) {
        Mat out(in.size(), std::vector<double>(w[0].size()));
        for (size_t t = 0; t < in.size(); ++t) {
            for (size_t j = 0; j < w[0].size(); ++j) {
                double s = bias[j];
                for (size_t c = 0; c < in[0].size(); ++c) s += in[t][c] * w[c][j];
                out[t][j] = s;
            }
        }
        return out;
    };
    const Mat q = project(q_in, wq, bq), k = project(kv_in, wk, bk), v = project(kv_in, wv, bv);

    Mat merged(tq, std::vector<double>(heads * dv));
    for (size_t h = 0; h < heads; ++h) {
        for (size_t i = 0; i < tq; ++i) {
            std::vector<double> scores(tk, -1e300);
            for (size_t j = 0; j < tk; ++j) {
                if (causal && j > i) continue;
                double s = 0;
                for (size_t c = 0; c < dkq; ++c) s += q[i][h * dkq + c] * k[j][h * dkq + c];
                scores[j] = s / std::sqrt(double(dkq));
            }
            double mx = -1e300;
            for (double s : scores) mx = std::max(mx, s);
            double z = 0;
            std::vector<double> att(tk, 0.0);
            for (size_t j = 0; j < tk; ++j) {
                if (causal && j > i) continue;
                att[j] = std::exp(scores[j] - mx);
                z += att[j];
            }
            for (size_t j = 0; j < tk; ++j) att[j] /= z;
            for (size_t c = 0; c < dv; ++c) {
                double s = 0;
                for (size_t j = 0; j < tk; ++j) s += att[j] * v[j][h * dv + c];
                merged[i][h * dv + c] = s;
            }
        }
    }
    Mat out(tq, std::vector<double>(d));
    for (size_t t = 0; t < tq; ++t) {
        for (size_t c = 0; c < d; ++c) {
            double s = bo[c];
            for (size_t j = 0; j < heads * dv; ++j) s += merged[t][j] * wo[j][c];
            out[t][c] = s;
        }
    }
    return out;
}

Mat ffn_oracle(const ParameterRegistry& reg, const std::string& prefix, const Mat& x) {
    const Mat w1 = get2d(reg, prefix + ".w1"), w2 = get2d(reg, prefix + ".w2");
    const auto b1 = get1d(reg, prefix + ".b1"), b2 = get1d(reg, prefix + ".b2");
    const size_t ff = w1.size(), d = w2.size();
    Mat out(x.size(), std::vector<double>(d));
    for (size_t t = 0; t < x.size(); ++t) {
        std::vector<double> h(ff);
        for (size_t o = 0; o < ff; ++o) {
            double s = b1[o];
            for (size_t c = 0; c < d; ++c) s += x[t][c] * w1[o][c];
            h[o] = s > 0 ? s : 0;
        }
        for (size_t c = 0; c < d; ++c) {
            double s = b2[c];
            for (size_t o = 0; o < ff; ++o) s += h[o] * w2[c][o];
            out[t][c] = s;
        }
    }
    return out;
}

void add_into(Mat& x, const Mat& y) {
    for (size_t t = 0; t < x.size(); ++t) {
        for (size_t c = 0; c < x[t].size(); ++c) x[t][c] += y[t][c];
    }
}

Mat seq2seq_oracle(const TransformerModel& model, const std::vector<int>& src,
                   const std::vector<int>& tgt_in) {
    const ModelConfig& cfg = model.config();
    const ParameterRegistry& reg = model.registry();
    const size_t heads = cfg.n_heads, dkq = cfg.head_kq(), dv = cfg.head_v();

    Mat x = embed_oracle(reg, src, cfg.d_model);
    for (size_t l = 0; l < cfg.n_enc_layers; ++l) {
        const std::string base = "enc.l" + std::to_string(l);
        Mat h = norm_oracle(x, get1d(reg, base + ".self_norm.gain"),
                            get1d(reg, base + ".self_norm.bias"));
        add_into(x, attention_oracle(reg, base + ".self", h, h, heads, dkq, dv, false));
        h = norm_oracle(x, get1d(reg, base + ".ffn_norm.gain"),
                        get1d(reg, base + ".ffn_norm.bias"));
        add_into(x, ffn_oracle(reg, base + ".ffn", h));
    }
    const Mat memory = norm_oracle(x, get1d(reg, "enc.final_norm.gain"),
                                   get1d(reg, "enc.final_norm.bias"));

    Mat y = embed_oracle(reg, tgt_in, cfg.d_model);
    for (size_t l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string base = "dec.l" + std::to_string(l);
        Mat h = norm_oracle(y, get1d(reg, base + ".self_norm.gain"),
                            get1d(reg, base + ".self_norm.bias"));
        add_into(y, attention_oracle(reg, base + ".self", h, h, heads, dkq, dv, true));
        h = norm_oracle(y, get1d(reg, base + ".ctx_norm.gain"),
                        get1d(reg, base + ".ctx_norm.bias"));
        add_into(y, attention_oracle(reg, base + ".ctx", h, memory, heads, dkq, dv, false));
        h = norm_oracle(y, get1d(reg, base + ".ffn_norm.gain"),
                        get1d(reg, base + ".ffn_norm.bias"));
        add_into(y, ffn_oracle(reg, base + ".ffn", h));
    }
    const Mat h = norm_oracle(y, get1d(reg, "dec.final_norm.gain"),
                              get1d(reg, "dec.final_norm.bias"));
    const Mat emb = get2d(reg, "emb.shared");
    Mat logits(tgt_in.size(), std::vector<double>(cfg.vocab_size));
    for (size_t t = 0; t < tgt_in.size(); ++t) {
        for (size_t vtok = 0; vtok < cfg.vocab_size; ++vtok) {
            double s = 0;
            for (size_t c = 0; c < cfg.d_model; ++c) s += h[t][c] * emb[vtok][c];
            logits[t][vtok] = s;
        }
    }
    return logits;
}

}  // namespace

TEST_CASE("tied embeddings: exactly one EMB matrix of shape [vocab, d_model]") {
    const TransformerModel model(toy_config(), 1);
    size_t emb_matrices = 0;
    for (const Parameter& p : model.registry().params()) {
        if (p.tag.group == Group::EMB) {
            ++emb_matrices;
            CHECK(p.shape == std::vector<size_t>{10, 8});
        }
    }
    CHECK(emb_matrices == 1);
}

TEST_CASE("language model mode has no context attention") {
    ModelConfig cfg = toy_config();
    cfg.mode = Mode::language_model;
    cfg.n_enc_layers = 0;
    cfg.n_dec_layers = 2;
    const TransformerModel model(cfg, 1);
    for (const Parameter& p : model.registry().params()) {
        CHECK(p.tag.att_kind != AttKind::context);
        CHECK(p.tag.side != Side::encoder);
    }
}

TEST_CASE("config validation catches violations") {
    ModelConfig bad = toy_config();
    bad.mode = Mode::language_model;  // still has encoder layers
    CHECK_THROWS_AS(TransformerModel(bad, 1), ConfigError);
    ModelConfig odd = toy_config();
    odd.n_heads = 3;  // does not divide d_model = 8
    CHECK_THROWS_AS(TransformerModel(odd, 1), ConfigError);
    ModelConfig zero = toy_config();
    zero.d_ff = 0;
    CHECK_THROWS_AS(TransformerModel(zero, 1), ConfigError);
}

TEST_CASE("registry partition: group counts sum to total") {
    const ParameterRegistry reg = TransformerModel::build_registry(toy_config(12, 8, 16, 2, 2, 2));
    const size_t sum = reg.group_count(Group::EMB) + reg.group_count(Group::ATT) +
                       reg.group_count(Group::FFN) + reg.group_count(Group::OTHER);
    CHECK(sum == reg.total_count());
}

TEST_CASE("rebuilding with the same seed is bit-identical") {
    const TransformerModel a(toy_config(), 1234);
    const TransformerModel b(toy_config(), 1234);
    const TransformerModel c(toy_config(), 1235);
    bool any_diff = false;
    for (size_t i = 0; i < a.registry().size(); ++i) {
        CHECK(a.registry().params()[i].tensor.data() == b.registry().params()[i].tensor.data());
        if (a.registry().params()[i].tensor.data() != c.registry().params()[i].tensor.data()) {
            any_diff = true;
        }
    }
    CHECK(any_diff);
}

TEST_CASE("causality: perturbing a target position leaves earlier logits bit-identical") {
    const TransformerModel model(toy_config(10, 8, 16, 2, 1, 2), 7);
    const std::vector<int> src{4, 5, 6, 2};
    std::vector<int> tgt{1, 4, 5, 6, 7};
    const Tensor base = model.forward_seq2seq(src, tgt);
    for (size_t j = 1; j < tgt.size(); ++j) {
        std::vector<int> perturbed = tgt;
        perturbed[j] = (perturbed[j] + 3) % 10;
        const Tensor out = model.forward_seq2seq(src, perturbed);
        for (size_t r = 0; r < j; ++r) {
            for (size_t c = 0; c < out.cols(); ++c) {
                CHECK(out.at(r, c) == base.at(r, c));  // bit-identical
            }
        }
    }
}

TEST_CASE("single BOS source still yields finite logits") {
    const TransformerModel model(toy_config(), 3);
    const Tensor out = model.forward_seq2seq(std::vector<int>{1}, std::vector<int>{1, 4});
    for (double v : out.data()) CHECK(std::isfinite(v));
}

TEST_CASE("one-layer model matches the straight-line forward oracle") {
    const TransformerModel model(toy_config(10, 8, 16, 2, 1, 1), 99);
    const std::vector<int> src{4, 7, 5, 2};
    const std::vector<int> tgt{1, 6, 9, 8};
    const Tensor got = model.forward_seq2seq(src, tgt);
    const Mat expect = seq2seq_oracle(model, src, tgt);
    for (size_t t = 0; t < tgt.size(); ++t) {
        for (size_t vtok = 0; vtok < 10; ++vtok) {
            CHECK(std::abs(got.at(t, vtok) - expect[t][vtok]) < 1e-10);
        }
    }
}

TEST_CASE("two-layer model matches the straight-line forward oracle") {
    const TransformerModel model(toy_config(11, 8, 12, 2, 2, 2), 123);
    const std::vector<int> src{3, 9, 10, 2};
    const std::vector<int> tgt{1, 5, 4, 7, 6};
    const Tensor got = model.forward_seq2seq(src, tgt);
    const Mat expect = seq2seq_oracle(model, src, tgt);
    for (size_t t = 0; t < tgt.size(); ++t) {
        for (size_t vtok = 0; vtok < 11; ++vtok) {
            CHECK(std::abs(got.at(t, vtok) - expect[t][vtok]) < 1e-10);
        }
    }
}

TEST_CASE("lm logits at position t are invariant to later tokens") {
    ModelConfig cfg = toy_config(10, 8, 16, 2, 0, 2);
    cfg.mode = Mode::language_model;
    const TransformerModel model(cfg, 21);
    std::vector<int> toks{1, 4, 5, 6, 7, 8};
    const Tensor base = model.forward_lm(toks);
    std::vector<int> changed = toks;
    changed[4] = 9;
    const Tensor out = model.forward_lm(changed);
    for (size_t r = 0; r < 4; ++r) {
        for (size_t c = 0; c < out.cols(); ++c) CHECK(out.at(r, c) == base.at(r, c));
    }
}

TEST_CASE("lm assigns a probability distribution at every position") {
    ModelConfig cfg = toy_config(5, 8, 16, 2, 0, 1);
    cfg.mode = Mode::language_model;
    const TransformerModel model(cfg, 22);
    const Tensor logits = model.forward_lm(std::vector<int>{1, 4, 4, 3});
    const Tensor probs = softmax_rows(logits);
    for (size_t r = 0; r < probs.rows(); ++r) {
        double s = 0;
        for (size_t c = 0; c < probs.cols(); ++c) s += probs.at(r, c);
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("multi_head_attention with identity projections returns values") {
    AttentionParams p;
    p.n_heads = 1;
    p.d_kq = 4;
    p.d_v = 4;
    p.wq = Tensor::from_data({4, 4}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
    p.wk = p.wq;
    p.wv = p.wq;
    p.wo = p.wq;
    p.bq = Tensor::zeros({4});
    p.bk = p.bq;
    p.bv = p.bq;
    p.bo = p.bq;
    const Tensor v_in = Tensor::from_data({1, 4}, {0.5, -1.0, 2.0, 0.25});
    const Tensor out = multi_head_attention(v_in, v_in, v_in, p);
    for (size_t c = 0; c < 4; ++c) CHECK(out.at(0, c) == doctest::Approx(v_in.at(0, c)));
}

TEST_CASE("two-head attention matches a per-head loop oracle") {
    const TransformerModel model(toy_config(10, 8, 16, 2, 1, 1), 5);
    // reuse the model's own enc.l0.self weights against the oracle
    Rng rng(77);
    Mat q_in(3, std::vector<double>(8)), kv_in(4, std::vector<double>(8));
    for (auto& row : q_in) {
        for (double& v : row) v = rng.uniform(-1, 1);
    }
    for (auto& row : kv_in) {
        for (double& v : row) v = rng.uniform(-1, 1);
    }
    auto to_tensor = [](const Mat& m) {
        Tensor t = Tensor::zeros({m.size(), m[0].size()});
        for (size_t r = 0; r < m.size(); ++r) {
            for (size_t c = 0; c < m[0].size(); ++c) t.at(r, c) = m[r][c];
        }
        return t;
    };
    AttentionParams p;
    p.n_heads = 2;
    p.d_kq = 4;
    p.d_v = 4;
    const auto& reg = model.registry();
    p.wq = reg.at("enc.l0.self.wq").tensor;
    p.wk = reg.at("enc.l0.self.wk").tensor;
    p.wv = reg.at("enc.l0.self.wv").tensor;
    p.wo = reg.at("enc.l0.self.wo").tensor;
    p.bq = reg.at("enc.l0.self.bq").tensor;
    p.bk = reg.at("enc.l0.self.bk").tensor;
    p.bv = reg.at("enc.l0.self.bv").tensor;
    p.bo = reg.at("enc.l0.self.bo").tensor;
    const Tensor got = multi_head_attention(to_tensor(q_in), to_tensor(kv_in),
                                            to_tensor(kv_in), p);
    const Mat expect = attention_oracle(reg, "enc.l0.self", q_in, kv_in, 2, 4, 4, false);
    for (size_t r = 0; r < 3; ++r) {
        for (size_t c = 0; c < 8; ++c) CHECK(std::abs(got.at(r, c) - expect[r][c]) < 1e-10);
    }
}

TEST_CASE("tied embedding gradient matches finite differences over all three uses") {
    const TransformerModel model(toy_config(10, 8, 16, 2, 1, 1), 31);
    const Parameter& emb = model.registry().at("emb.shared");
    const std::vector<int> src{4, 5, 2};
    const std::vector<int> tgt_in{1, 6, 7};
    const std::vector<int> tgt_out{6, 7, 2};
    auto loss = [&]() {
        return cross_entropy(model.forward_seq2seq(src, tgt_in), tgt_out, /*ignore_index=*/0);
    };
    CHECK(oracles::finite_diff_max_rel_err(loss, {emb.tensor}) < 1e-4);
}

TEST_CASE("attention-reduced architecture puts ATT near six percent of the big total") {
    ModelConfig cfg;
    cfg.vocab_size = 36000;
    cfg.d_model = 1024;
    cfg.d_ff = 4096;
    cfg.n_heads = 8;
    cfg.d_kq = 1024 / (8 * 8);  // d_model / (8 * n_heads)
    cfg.d_v = cfg.d_kq;
    cfg.n_enc_layers = 6;
    cfg.n_dec_layers = 6;
    const ParameterRegistry reg = TransformerModel::build_registry(cfg);
    const double att_share = double(reg.group_count(Group::ATT)) / double(reg.total_count());
    CHECK(std::abs(att_share - 0.06) < 0.01);
}

TEST_CASE("transformer-big metadata registry counts about 213M parameters") {
    ModelConfig cfg;
    cfg.vocab_size = 36000;
    cfg.d_model = 1024;
    cfg.d_ff = 4096;
    cfg.n_heads = 8;
    cfg.n_enc_layers = 6;
    cfg.n_dec_layers = 6;
    const ParameterRegistry reg = TransformerModel::build_registry(cfg);
    CHECK(std::abs(double(reg.total_count()) / 213e6 - 1.0) < 0.02);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    const ModelConfig cfg = toy_config(12, 8, 16, 2, 2, 1);
    TransformerModel model(cfg, 321);
    model.registry().at("enc.l0.ffn.w1").set_trainable(false);
    const std::string path = "ckpt_roundtrip_test.bin";
    save_checkpoint(path, model);
    const TransformerModel loaded = load_checkpoint(path);
    CHECK(loaded.config() == cfg);
    for (size_t i = 0; i < model.registry().size(); ++i) {
        const Parameter& a = model.registry().params()[i];
        const Parameter& b = loaded.registry().params()[i];
        CHECK(a.name == b.name);
        CHECK(a.tensor.data() == b.tensor.data());  // bit-exact
        CHECK(a.trainable == b.trainable);
        CHECK(a.tag == b.tag);
    }
    std::remove(path.c_str());
}
