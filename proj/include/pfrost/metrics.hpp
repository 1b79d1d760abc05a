#pragma once

#include <span>
#include <vector>

#include "pfrost/data.hpp"
#include "pfrost/model.hpp"

namespace pfrost {

// Corpus-level BLEU in [0, 100]: geometric mean of modified n-gram
// precisions up to max_n, times the brevity penalty. Without smoothing any
// zero precision yields 0; with floor smoothing a zero-match order is
// floored at 1 / (2 * candidate n-gram count). Orders with no candidate
// n-grams at all (every hypothesis shorter than n) are left out of the
// mean.
double corpus_bleu(const std::vector<std::vector<int>>& hypotheses,
                   const std::vector<std::vector<int>>& references, int max_n = 4,
                   bool floor_smoothing = false);

// exp(total NLL / total predicted tokens) with PAD excluded; every sequence
// predicts its tokens plus EOS.
double perplexity(const TransformerModel& model, const MonoCorpus& corpus);
double perplexity(const TransformerModel& model, const ParallelCorpus& corpus);

// Sum of next-token NLL over the sequence (tokens then EOS) and the number
// of predicted tokens.
std::pair<double, size_t> sequence_nll(const TransformerModel& model,
                                       std::span<const int> src,
                                       std::span<const int> tgt);
std::pair<double, size_t> sequence_nll_lm(const TransformerModel& model,
                                          std::span<const int> tokens);

// Argmax decoding from BOS until EOS or max_len tokens; returns the emitted
// tokens without BOS/EOS. Ties resolve to the lowest token id.
std::vector<int> greedy_decode(const TransformerModel& model, std::span<const int> src,
                               size_t max_len);

}  // namespace pfrost
