#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfrost/data.hpp"
#include "pfrost/freezing.hpp"
#include "pfrost/model.hpp"
#include "pfrost/optim.hpp"

namespace pfrost {

struct TrainConfig {
    double learning_rate = 3e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    size_t batch_size = 16;
    size_t max_epochs = 20;
    size_t stall_patience_ppl = 10;
    size_t stall_patience_bleu = 50;
    size_t eval_every = 1;  // epochs between dev evaluations
    uint64_t seed = 1;      // batch shuffling
    size_t decode_max_len = 64;

    void validate() const;
};

// Consecutive-stall counter over dev evaluations: a stall is an evaluation
// that fails to improve the best value seen so far.
class StallTracker {
public:
    explicit StallTracker(bool lower_is_better) : lower_(lower_is_better) {}

    // Returns true when the value improves the best so far.
    bool observe(double value);
    size_t stalls() const { return stalls_; }
    double best() const { return best_; }
    size_t best_index() const { return best_index_; }  // 1-based observation index

private:
    bool lower_;
    bool seen_ = false;
    double best_ = 0.0;
    size_t stalls_ = 0;
    size_t count_ = 0;
    size_t best_index_ = 0;
};

struct EpochEval {
    size_t epoch = 0;  // 1-based
    double ppl = 0.0;
    std::optional<double> bleu;  // absent in LM mode
};

struct RunRecord {
    std::vector<EpochEval> evals;
    size_t epochs_run = 0;
    size_t epochs_to_converge = 0;  // 1-based epoch of the best dev metric
    double best_ppl = 0.0;
    std::optional<double> best_bleu;
    double final_metric = 0.0;  // BLEU in translation mode, PPL in LM mode
    std::string freeze_spec;
    double ratio = 1.0;  // trainable/all of the trained model
    long long steps = 0;
    double wall_seconds = 0.0;  // reported separately, never part of determinism checks

    std::string metrics_csv() const;  // "epoch,ppl,bleu" per evaluation
};

// Trains in place: applies the freeze spec (including the epoch schedule),
// runs Adam with per-epoch dev evaluation and stall-based early stopping,
// and returns the best evaluation's record. Throws TrainingDiverged when
// the loss goes non-finite.
RunRecord train(TransformerModel& model, const MtDataset& data, const FreezeSpec& spec,
                const TrainConfig& cfg);
RunRecord train(TransformerModel& model, const LmDataset& data, const FreezeSpec& spec,
                const TrainConfig& cfg);

}  // namespace pfrost
