// Independent oracles used by the test suites. Everything here is written
// against plain vectors, separately from the library's implementation
// paths, so the two can disagree.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "pfrost/config.hpp"
#include "pfrost/tensor.hpp"

namespace oracles {

// Central finite differences over every element of the given parameters.
// make_loss must be a pure function of the parameter values: it is called
// once under a tape for the analytic gradients and many times without one.
// Relative error uses a 1e-8 absolute floor.
inline double finite_diff_max_rel_err(const std::function<pfrost::Tensor()>& make_loss,
                                      const std::vector<pfrost::Tensor>& params,
                                      double step = 1e-5) {
    std::vector<std::vector<double>> analytic;
    {
        pfrost::Tape tape;
        pfrost::Tensor loss = make_loss();
        tape.backward(loss);
        for (const auto& p : params) {
            analytic.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.numel(), 0.0));
        }
    }
    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        pfrost::Tensor p = params[pi];
        for (size_t i = 0; i < p.numel(); ++i) {
            const double saved = p.data()[i];
            p.data()[i] = saved + step;
            const double up = make_loss().item();
            p.data()[i] = saved - step;
            const double down = make_loss().item();
            p.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[pi][i];
            const double denom = std::max({1e-8, std::abs(a), std::abs(numeric)});
            max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
        }
    }
    return max_rel;
}

// Direct exp/normalize evaluation of a softmax row.
inline std::vector<double> softmax_row(const std::vector<double>& row) {
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    std::vector<double> out(row.size());
    double z = 0.0;
    for (size_t i = 0; i < row.size(); ++i) {
        out[i] = std::exp(row[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

// Mean NLL of targets under row-wise softmax, plus d(loss)/d(logits),
// computed directly from the definition.
struct CeOracle {
    double loss;
    std::vector<double> dlogits;  // t*v
};

inline CeOracle cross_entropy_oracle(const std::vector<double>& logits, size_t t, size_t v,
                                     const std::vector<int>& targets) {
    CeOracle out{0.0, std::vector<double>(t * v, 0.0)};
    for (size_t r = 0; r < t; ++r) {
        std::vector<double> row(logits.begin() + r * v, logits.begin() + (r + 1) * v);
        const std::vector<double> p = softmax_row(row);
        out.loss += -std::log(p[targets[r]]);
        for (size_t c = 0; c < v; ++c) {
            out.dlogits[r * v + c] = (p[c] - (static_cast<int>(c) == targets[r] ? 1.0 : 0.0)) /
                                     static_cast<double>(t);
        }
    }
    out.loss /= static_cast<double>(t);
    return out;
}

// Exhaustive n-gram BLEU: cliped matches found by scanning, no hash maps,
// written independently of the library implementation.
inline double bleu_oracle(const std::vector<std::vector<int>>& hyps,
                          const std::vector<std::vector<int>>& refs, int max_n,
                          bool floor_smoothing) {
    auto gram_eq = [](const std::vector<int>& a, size_t ia, const std::vector<int>& b,
                      size_t ib, int n) {
        for (int k = 0; k < n; ++k) {
            if (a[ia + k] != b[ib + k]) return false;
        }
        return true;
    };
    std::vector<long long> matched(max_n, 0), total(max_n, 0);
    long long hyp_len = 0, ref_len = 0;
    for (size_t s = 0; s < hyps.size(); ++s) {
        const auto& h = hyps[s];
        const auto& r = refs[s];
        hyp_len += static_cast<long long>(h.size());
        ref_len += static_cast<long long>(r.size());
        for (int n = 1; n <= max_n; ++n) {
            if (h.size() < static_cast<size_t>(n)) continue;
            for (size_t i = 0; i + n <= h.size(); ++i) {
                // only handle the first occurrence of each distinct n-gram
                bool first = true;
                for (size_t j = 0; j < i; ++j) {
                    if (gram_eq(h, j, h, i, n)) {
                        first = false;
                        break;
                    }
                }
                if (!first) continue;
                long long in_hyp = 0;
                for (size_t j = 0; j + n <= h.size(); ++j) {
                    if (gram_eq(h, j, h, i, n)) ++in_hyp;
                }
                long long in_ref = 0;
                if (r.size() >= static_cast<size_t>(n)) {
                    for (size_t j = 0; j + n <= r.size(); ++j) {
                        if (gram_eq(r, j, h, i, n)) ++in_ref;
                    }
                }
                total[n - 1] += in_hyp;
                matched[n - 1] += std::min(in_hyp, in_ref);
            }
        }
    }
    double logp = 0.0;
    int orders = 0;
    for (int n = 0; n < max_n; ++n) {
        if (total[n] == 0) continue;
        ++orders;
        if (matched[n] == 0) {
            if (!floor_smoothing) return 0.0;
            logp += std::log(0.5 / static_cast<double>(total[n]));
        } else {
            logp += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
        }
    }
    if (orders == 0 || hyp_len == 0) return 0.0;
    const double bp = hyp_len < ref_len
                          ? std::exp(1.0 - static_cast<double>(ref_len) /
                                               static_cast<double>(hyp_len))
                          : 1.0;
    return 100.0 * bp * std::exp(logp / orders);
}

// Closed-form parameter counts from the architecture definition, the
// second counting path that the registry walk must agree with exactly.
struct ClosedFormCounts {
    long long emb = 0, att = 0, ffn = 0, other = 0;
    long long total() const { return emb + att + ffn + other; }
};

inline ClosedFormCounts closed_form_counts(const pfrost::ModelConfig& c) {
    ClosedFormCounts out;
    const long long d = c.d_model, ff = c.d_ff;
    const long long kq = c.kq_total(), v = c.v_total();
    const long long enc = c.n_enc_layers, dec = c.n_dec_layers;
    const bool lm = c.mode == pfrost::Mode::language_model;
    const long long att_modules = enc + (lm ? dec : 2 * dec);
    const long long ffn_layers = enc + dec;

    out.emb = static_cast<long long>(c.vocab_size) * d;
    out.att = att_modules * (2 * kq * d + v * d + d * v);
    out.ffn = ffn_layers * 2 * (ff * d);
    const long long att_bias = att_modules * (2 * kq + v + d);
    const long long ffn_bias = ffn_layers * (ff + d);
    const long long norms_enc = enc * 2 * 2 * d;
    const long long norms_dec = dec * (lm ? 2 : 3) * 2 * d;
    const long long norms_final = (enc > 0 ? 2 * d : 0) + 2 * d;
    out.other = att_bias + ffn_bias + norms_enc + norms_dec + norms_final;
    return out;
}

// Reference generator for synthetic translation pairs: shift each token by
// k modulo the alphabet, then reverse.
inline std::vector<int> reference_substitute_shift(const std::vector<int>& src,
                                                   int alphabet, int k) {
    std::vector<int> out;
    for (auto it = src.rbegin(); it != src.rend(); ++it) {
        out.push_back((*it + k) % alphabet);
    }
    return out;
}

}  // namespace oracles
