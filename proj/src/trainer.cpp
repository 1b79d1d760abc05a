#include "pfrost/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "pfrost/accounting.hpp"
#include "pfrost/error.hpp"
#include "pfrost/metrics.hpp"

namespace pfrost {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("train config: learning_rate must be positive");
    if (stall_patience_ppl < 1 || stall_patience_bleu < 1) {
        throw ConfigError("train config: stall patiences must be >= 1");
    }
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (eval_every < 1) throw ConfigError("train config: eval_every must be >= 1");
    if (max_epochs < 1) throw ConfigError("train config: max_epochs must be >= 1");
}

bool StallTracker::observe(double value) {
    ++count_;
    const bool improved = !seen_ || (lower_ ? value < best_ : value > best_);
    if (improved) {
        seen_ = true;
        best_ = value;
        best_index_ = count_;
        stalls_ = 0;
    } else {
        ++stalls_;
    }
    return improved;
}

std::string RunRecord::metrics_csv() const {
    std::ostringstream os;
    os << "epoch,ppl,bleu\n";
    for (const EpochEval& e : evals) {
        os << e.epoch << "," << e.ppl << ",";
        if (e.bleu) os << *e.bleu;
        os << "\n";
    }
    return os.str();
}

namespace {

// Real (unpadded) row of a padded batch matrix.
std::vector<int> masked_row(const std::vector<int>& row, const std::vector<uint8_t>& mask) {
    size_t len = 0;
    while (len < mask.size() && mask[len]) ++len;
    return std::vector<int>(row.begin(), row.begin() + len);
}

struct StepStats {
    long long steps = 0;
};

// One optimizer step over a batch: loss is the token-weighted mean of the
// per-sequence cross entropies.
void train_batch(TransformerModel& model, const Batch& batch, bool lm, Adam& adam,
                 StepStats& stats) {
    Tape tape;
    Tensor acc;
    double total_tokens = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const std::vector<int> tgt_in = masked_row(batch.tgt_in[i], batch.tgt_mask[i]);
        const std::vector<int> tgt_out = masked_row(batch.tgt_out[i], batch.tgt_mask[i]);
        Tensor logits;
        if (lm) {
            logits = model.forward_lm(tgt_in);
        } else {
            const std::vector<int> src = masked_row(batch.src[i], batch.src_mask[i]);
            logits = model.forward_seq2seq(src, tgt_in);
        }
        const Tensor ce = cross_entropy(logits, tgt_out, Vocab::pad_id);
        const double n = static_cast<double>(tgt_out.size());
        const Tensor weighted = scale(ce, n);
        acc = acc.defined() ? add(acc, weighted) : weighted;
        total_tokens += n;
    }
    const Tensor loss = scale(acc, 1.0 / total_tokens);
    if (!std::isfinite(loss.item())) {
        throw TrainingDiverged(stats.steps, "training diverged: non-finite loss at step " +
                                                std::to_string(stats.steps));
    }
    tape.backward(loss);
    adam.step(model.registry());
    ++stats.steps;
}

struct DevEval {
    double ppl = 0.0;
    std::optional<double> bleu;
};

template <typename Dataset>
DevEval evaluate_dev(const TransformerModel& model, const Dataset& data, size_t decode_max_len);

DevEval evaluate_dev(const TransformerModel& model, const MtDataset& data,
                     size_t decode_max_len) {
    DevEval ev;
    ev.ppl = perplexity(model, data.dev);
    std::vector<std::vector<int>> hyps;
    hyps.reserve(data.dev.size());
    for (const auto& src : data.dev.src) {
        std::vector<int> with_eos = src;
        with_eos.push_back(Vocab::eos_id);
        hyps.push_back(greedy_decode(model, with_eos, decode_max_len));
    }
    ev.bleu = corpus_bleu(hyps, data.dev.tgt);
    return ev;
}

DevEval evaluate_dev(const TransformerModel& model, const LmDataset& data,
                     size_t /*decode_max_len*/) {
    DevEval ev;
    ev.ppl = perplexity(model, data.dev);
    return ev;
}

std::vector<Batch> epoch_batches(const MtDataset& d, size_t bs, uint64_t seed, uint64_t ep) {
    return batch_iter(d.train, bs, seed, ep);
}
std::vector<Batch> epoch_batches(const LmDataset& d, size_t bs, uint64_t seed, uint64_t ep) {
    return batch_iter(d.train, bs, seed, ep);
}

template <typename Dataset>
RunRecord train_impl(TransformerModel& model, const Dataset& data, const FreezeSpec& spec,
                     const TrainConfig& cfg, bool lm) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.freeze_spec = spec.str();
    if (!spec.empty()) apply_freeze(model.registry(), spec);

    Adam adam({cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    StallTracker ppl_track(/*lower_is_better=*/true);
    StallTracker bleu_track(/*lower_is_better=*/false);
    StepStats stats;
    const bool deferred_freeze = !spec.empty() && spec.freeze_at_epoch &&
                                 *spec.freeze_at_epoch > 0;

    for (size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (deferred_freeze) {
            const FreezeReport hook = freeze_at_epoch_hook(model.registry(), spec,
                                                           static_cast<int>(epoch));
            if (!hook.affected.empty()) adam.drop(hook.affected);
        }
        for (const Batch& batch : epoch_batches(data, cfg.batch_size, cfg.seed, epoch)) {
            train_batch(model, batch, lm, adam, stats);
        }
        rec.epochs_run = epoch + 1;

        if ((epoch + 1) % cfg.eval_every != 0) continue;
        const DevEval ev = evaluate_dev(model, data, cfg.decode_max_len);
        if (!std::isfinite(ev.ppl)) {
            throw TrainingDiverged(stats.steps, "training diverged: non-finite dev perplexity");
        }
        rec.evals.push_back({epoch + 1, ev.ppl, ev.bleu});
        const bool ppl_improved = ppl_track.observe(ev.ppl);
        bool primary_improved = ppl_improved;
        if (ev.bleu) {
            const bool bleu_improved = bleu_track.observe(*ev.bleu);
            primary_improved = bleu_improved;
        }
        if (primary_improved) rec.epochs_to_converge = epoch + 1;

        // Whichever patience fires first stops the run.
        if (ppl_track.stalls() >= cfg.stall_patience_ppl) break;
        if (ev.bleu && bleu_track.stalls() >= cfg.stall_patience_bleu) break;
    }

    rec.steps = stats.steps;
    // End-state ratio: deferred freeze schedules have fired by now, so this
    // matches count_budget for the same (config, spec).
    rec.ratio = static_cast<double>(model.registry().trainable_count()) /
                static_cast<double>(model.registry().total_count());
    rec.best_ppl = ppl_track.best();
    if (!lm) {
        rec.best_bleu = bleu_track.best();
        rec.final_metric = bleu_track.best();
        rec.epochs_to_converge = rec.evals.empty() ? rec.epochs_run
                                                   : rec.evals[bleu_track.best_index() - 1].epoch;
    } else {
        rec.final_metric = ppl_track.best();
        rec.epochs_to_converge = rec.evals.empty() ? rec.epochs_run
                                                   : rec.evals[ppl_track.best_index() - 1].epoch;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

RunRecord train(TransformerModel& model, const MtDataset& data, const FreezeSpec& spec,
                const TrainConfig& cfg) {
    return train_impl(model, data, spec, cfg, /*lm=*/false);
}

RunRecord train(TransformerModel& model, const LmDataset& data, const FreezeSpec& spec,
                const TrainConfig& cfg) {
    return train_impl(model, data, spec, cfg, /*lm=*/true);
}

}  // namespace pfrost
