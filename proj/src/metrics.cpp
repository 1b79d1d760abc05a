#include "pfrost/metrics.hpp"

#include <cmath>
#include <map>

#include "pfrost/error.hpp"

namespace pfrost {

double corpus_bleu(const std::vector<std::vector<int>>& hypotheses,
                   const std::vector<std::vector<int>>& references, int max_n,
                   bool floor_smoothing) {
    if (hypotheses.empty()) throw MetricError("corpus_bleu: empty hypothesis set");
    if (hypotheses.size() != references.size()) {
        throw MetricError("corpus_bleu: " + std::to_string(hypotheses.size()) +
                          " hypotheses for " + std::to_string(references.size()) +
                          " references");
    }
    if (max_n < 1) throw MetricError("corpus_bleu: max_n must be >= 1");

    std::vector<size_t> matched(max_n, 0), total(max_n, 0);
    size_t hyp_len = 0, ref_len = 0;
    for (size_t s = 0; s < hypotheses.size(); ++s) {
        const auto& hyp = hypotheses[s];
        const auto& ref = references[s];
        if (ref.empty()) {
            throw MetricError("corpus_bleu: empty reference at sentence " + std::to_string(s));
        }
        hyp_len += hyp.size();
        ref_len += ref.size();
        for (int n = 1; n <= max_n; ++n) {
            if (hyp.size() < static_cast<size_t>(n)) break;
            std::map<std::vector<int>, size_t> ref_counts;
            if (ref.size() >= static_cast<size_t>(n)) {
                for (size_t i = 0; i + n <= ref.size(); ++i) {
                    ++ref_counts[std::vector<int>(ref.begin() + i, ref.begin() + i + n)];
                }
            }
            std::map<std::vector<int>, size_t> hyp_counts;
            for (size_t i = 0; i + n <= hyp.size(); ++i) {
                ++hyp_counts[std::vector<int>(hyp.begin() + i, hyp.begin() + i + n)];
            }
            for (const auto& [gram, count] : hyp_counts) {
                total[n - 1] += count;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
            }
        }
    }

    double log_precision = 0.0;
    int orders = 0;
    for (int n = 0; n < max_n; ++n) {
        if (total[n] == 0) continue;  // no candidate n-grams at this order
        ++orders;
        if (matched[n] == 0) {
            if (!floor_smoothing) return 0.0;
            log_precision += std::log(1.0 / (2.0 * static_cast<double>(total[n])));
        } else {
            log_precision +=
                std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
        }
    }
    if (orders == 0 || hyp_len == 0) return 0.0;

    const double bp =
        hyp_len < ref_len
            ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
            : 1.0;
    return 100.0 * bp * std::exp(log_precision / static_cast<double>(orders));
}

std::pair<double, size_t> sequence_nll(const TransformerModel& model,
                                       std::span<const int> src,
                                       std::span<const int> tgt) {
    std::vector<int> tgt_in{Vocab::bos_id};
    tgt_in.insert(tgt_in.end(), tgt.begin(), tgt.end());
    std::vector<int> tgt_out(tgt.begin(), tgt.end());
    tgt_out.push_back(Vocab::eos_id);
    const Tensor logits = model.forward_seq2seq(src, tgt_in);
    const Tensor ce = cross_entropy(logits, tgt_out, Vocab::pad_id);
    return {ce.item() * static_cast<double>(tgt_out.size()), tgt_out.size()};
}

std::pair<double, size_t> sequence_nll_lm(const TransformerModel& model,
                                          std::span<const int> tokens) {
    std::vector<int> tgt_in{Vocab::bos_id};
    tgt_in.insert(tgt_in.end(), tokens.begin(), tokens.end());
    std::vector<int> tgt_out(tokens.begin(), tokens.end());
    tgt_out.push_back(Vocab::eos_id);
    const Tensor logits = model.forward_lm(tgt_in);
    const Tensor ce = cross_entropy(logits, tgt_out, Vocab::pad_id);
    return {ce.item() * static_cast<double>(tgt_out.size()), tgt_out.size()};
}

double perplexity(const TransformerModel& model, const MonoCorpus& corpus) {
    if (corpus.size() == 0) throw MetricError("perplexity: empty corpus");
    double nll = 0.0;
    size_t count = 0;
    for (const auto& line : corpus.lines) {
        auto [n, c] = sequence_nll_lm(model, line);
        nll += n;
        count += c;
    }
    return std::exp(nll / static_cast<double>(count));
}

double perplexity(const TransformerModel& model, const ParallelCorpus& corpus) {
    if (corpus.size() == 0) throw MetricError("perplexity: empty corpus");
    double nll = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < corpus.size(); ++i) {
        auto [n, c] = sequence_nll(model, corpus.src[i], corpus.tgt[i]);
        nll += n;
        count += c;
    }
    return std::exp(nll / static_cast<double>(count));
}

std::vector<int> greedy_decode(const TransformerModel& model, std::span<const int> src,
                               size_t max_len) {
    const Tensor memory = model.encode(src);
    std::vector<int> out;
    std::vector<int> tgt_in{Vocab::bos_id};
    // the decoder input includes BOS, so it can hold max_len - 1 emissions
    max_len = std::min(max_len, model.config().max_len - 1);
    for (size_t step = 0; step < max_len; ++step) {
        const Tensor logits = model.decode_with_memory(memory, tgt_in);
        const size_t last = logits.rows() - 1;
        int best = 0;
        double best_v = logits.at(last, 0);
        for (size_t c = 1; c < logits.cols(); ++c) {
            if (logits.at(last, c) > best_v) {
                best_v = logits.at(last, c);
                best = static_cast<int>(c);
            }
        }
        if (best == Vocab::eos_id) break;
        out.push_back(best);
        tgt_in.push_back(best);
    }
    return out;
}

}  // namespace pfrost
