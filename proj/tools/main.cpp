// pfrost command-line tool: train/evaluate desk-scale transformers with
// frozen components, audit parameter budgets, and run ablation grids.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pfrost/checkpoint.hpp"
#include "pfrost/harness.hpp"
#include "pfrost/metrics.hpp"

namespace fs = std::filesystem;
using namespace pfrost;

namespace {

struct ModelFlags {
    std::string preset_name;
    ModelConfig cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset_name, "start from a named preset configuration");
        cmd->add_option("--d-model", cfg.d_model, "embedding width");
        cmd->add_option("--d-ff", cfg.d_ff, "feed-forward hidden width");
        cmd->add_option("--heads", cfg.n_heads, "attention heads");
        cmd->add_option("--d-kq", cfg.d_kq, "per-head key/query width (0 = d_model/heads)");
        cmd->add_option("--d-v", cfg.d_v, "per-head value width (0 = d_model/heads)");
        cmd->add_option("--enc", cfg.n_enc_layers, "encoder layers");
        cmd->add_option("--dec", cfg.n_dec_layers, "decoder layers");
        cmd->add_option("--vocab", cfg.vocab_size, "vocabulary size (0 = from task data)");
        cmd->add_option("--max-len", cfg.max_len, "maximum sequence length");
    }

    ModelConfig resolve(bool lm) const {
        ModelConfig c;
        if (!preset_name.empty()) {
            c = preset(preset_name);
        } else {
            // desk-scale defaults
            c.d_model = 64;
            c.d_ff = 256;
            c.n_heads = 2;
            c.n_enc_layers = lm ? 0 : 2;
            c.n_dec_layers = 2;
            c.max_len = 64;
        }
        if (cfg.d_model) c.d_model = cfg.d_model;
        if (cfg.d_ff) c.d_ff = cfg.d_ff;
        if (cfg.n_heads) c.n_heads = cfg.n_heads;
        if (cfg.d_kq) c.d_kq = cfg.d_kq;
        if (cfg.d_v) c.d_v = cfg.d_v;
        if (cfg.n_enc_layers) c.n_enc_layers = cfg.n_enc_layers;
        if (cfg.n_dec_layers) c.n_dec_layers = cfg.n_dec_layers;
        if (cfg.vocab_size) c.vocab_size = cfg.vocab_size;
        if (cfg.max_len) c.max_len = cfg.max_len;
        if (lm) {
            c.mode = Mode::language_model;
            c.n_enc_layers = 0;
        }
        return c;
    }
};

struct TrainFlags {
    TrainConfig cfg;
    void attach(CLI::App* cmd) {
        cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
        cmd->add_option("--batch", cfg.batch_size, "batch size");
        cmd->add_option("--max-epochs", cfg.max_epochs, "epoch cap");
        cmd->add_option("--patience-ppl", cfg.stall_patience_ppl,
                        "consecutive dev-perplexity stalls before stopping");
        cmd->add_option("--patience-bleu", cfg.stall_patience_bleu,
                        "consecutive dev-BLEU stalls before stopping");
        cmd->add_option("--eval-every", cfg.eval_every, "epochs between dev evaluations");
        cmd->add_option("--decode-max-len", cfg.decode_max_len, "greedy decode cap");
    }
};

void print_record(const RunRecord& rec) {
    std::cout << "freeze:        " << (rec.freeze_spec.empty() ? "-" : rec.freeze_spec) << "\n"
              << "trainable/all: " << rec.ratio << "\n"
              << "epochs run:    " << rec.epochs_run << " (best at " << rec.epochs_to_converge
              << ")\n"
              << "steps:         " << rec.steps << "\n"
              << "best dev ppl:  " << rec.best_ppl << "\n";
    if (rec.best_bleu) std::cout << "best dev BLEU: " << *rec.best_bleu << "\n";
    std::cout << "wall seconds:  " << rec.wall_seconds << "\n";
}

int cmd_train(const ModelFlags& mf, const TrainFlags& tf, const std::string& task_str,
              const std::string& freeze_str, uint64_t seed, const std::string& out_dir,
              const std::string& save_path) {
    const TaskSpec task = parse_task_spec(task_str);
    TrainConfig tc = tf.cfg;
    tc.seed = seed;
    const FreezeSpec spec = FreezeSpec::parse(freeze_str);

    RunRecord rec;
    ModelConfig cfg = mf.resolve(task.is_lm());
    if (task.is_lm()) {
        const LmDataset data = build_lm_dataset(task);
        if (cfg.vocab_size == 0) cfg.vocab_size = data.vocab.size();
        TransformerModel model(cfg, seed);
        rec = train(model, data, spec, tc);
        if (!save_path.empty()) save_checkpoint(save_path, model);
    } else {
        const MtDataset data = build_mt_dataset(task);
        if (cfg.vocab_size == 0) cfg.vocab_size = data.vocab.size();
        TransformerModel model(cfg, seed);
        rec = train(model, data, spec, tc);
        if (!save_path.empty()) save_checkpoint(save_path, model);
    }
    print_record(rec);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "metrics.csv") << rec.metrics_csv();
        std::ofstream run_csv(fs::path(out_dir) / "run.csv");
        run_csv << "freeze,seed,ratio,best_ppl,best_bleu,epochs_to_converge,epochs_run,steps\n"
                << "\"" << rec.freeze_spec << "\"," << seed << "," << rec.ratio << ","
                << rec.best_ppl << ",";
        if (rec.best_bleu) run_csv << *rec.best_bleu;
        run_csv << "," << rec.epochs_to_converge << "," << rec.epochs_run << "," << rec.steps
                << "\n";
    }
    return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& task_str) {
    const TaskSpec task = parse_task_spec(task_str);
    const TransformerModel model = load_checkpoint(ckpt);
    if (task.is_lm()) {
        const LmDataset data = build_lm_dataset(task);
        std::cout << "dev ppl:  " << perplexity(model, data.dev) << "\n";
    } else {
        const MtDataset data = build_mt_dataset(task);
        std::cout << "dev ppl:  " << perplexity(model, data.dev) << "\n";
        std::vector<std::vector<int>> hyps;
        for (const auto& src : data.dev.src) {
            std::vector<int> s = src;
            s.push_back(Vocab::eos_id);
            hyps.push_back(greedy_decode(model, s, model.config().max_len));
        }
        std::cout << "dev BLEU: " << corpus_bleu(hyps, data.dev.tgt) << "\n";
    }
    return 0;
}

int cmd_count_params(const std::string& preset_name, const std::string& freeze_str,
                     double expect, bool has_expect, bool csv) {
    const ModelConfig cfg = preset(preset_name);
    const FreezeSpec spec = FreezeSpec::parse(freeze_str);
    const ParamBudget b = count_budget(cfg, spec);
    if (csv) {
        std::cout << "preset,freeze,total,trainable,ratio\n"
                  << preset_name << ",\"" << freeze_str << "\"," << b.total << ","
                  << b.trainable << "," << b.ratio << "\n";
    } else {
        std::cout << "preset:    " << preset_name << "\n";
        std::cout << "freeze:    " << (freeze_str.empty() ? "-" : freeze_str) << "\n";
        for (const auto& [g, n] : b.per_group) {
            std::cout << "  " << to_string(g) << ": " << n << "\n";
        }
        for (const auto& [sel, n] : b.per_selector) {
            std::cout << "  frozen by " << sel << ": " << n << "\n";
        }
        std::cout << "total:     " << b.total << "\n"
                  << "trainable: " << b.trainable << "\n"
                  << "ratio:     " << b.ratio << "\n";
    }
    if (has_expect) {
        const double delta = std::abs(b.ratio - expect);
        std::cout << "expected:  " << expect << "  |delta|: " << delta
                  << (delta <= 0.02 ? "  (ok)" : "  (MISMATCH)") << "\n";
        if (delta > 0.02) return 1;
    }
    return 0;
}

int cmd_ablate(const std::string& grid_path, int jobs, const std::string& out_dir) {
    const GridSpec grid = GridSpec::parse_file(grid_path);
    const GridReport report = run_grid(grid, jobs, out_dir);
    std::cout << report.markdown();
    return report.exit_code();
}

int cmd_report(const std::string& in_dir) {
    std::cout << render_report_dir(in_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale transformer training with component freezing"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "train one model on a task");
    ModelFlags train_model;
    TrainFlags train_flags;
    std::string train_task = "mt kind=copy alphabet=8 pairs=300 dev=32 len=2..8";
    std::string train_freeze;
    uint64_t train_seed = 1;
    std::string train_out, train_save;
    train_model.attach(train_cmd);
    train_flags.attach(train_cmd);
    train_cmd->add_option("--task", train_task, "task description string");
    train_cmd->add_option("--freeze", train_freeze, "freeze selector list");
    train_cmd->add_option("--seed", train_seed, "model init / shuffle seed");
    train_cmd->add_option("--out", train_out, "directory for run metrics");
    train_cmd->add_option("--save", train_save, "checkpoint output path");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a task's dev set");
    std::string eval_ckpt, eval_task;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--task", eval_task, "task description string")->required();

    // count-params
    auto* count_cmd = app.add_subcommand("count-params", "parameter budget for a preset");
    std::string count_preset, count_freeze;
    double count_expect = 0.0;
    bool count_csv = false;
    count_cmd->add_option("--preset", count_preset, "preset name")->required();
    count_cmd->add_option("--freeze", count_freeze, "freeze selector list");
    auto* expect_opt = count_cmd->add_option("--expect", count_expect,
                                             "expected trainable/all ratio (+-0.02)");
    count_cmd->add_flag("--csv", count_csv, "CSV output");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "run an experiment grid");
    std::string ablate_grid, ablate_out;
    int ablate_jobs = 0;
    ablate_cmd->add_option("--grid", ablate_grid, "grid file")->required();
    ablate_cmd->add_option("--jobs", ablate_jobs, "worker threads (0 = auto)");
    ablate_cmd->add_option("--out", ablate_out, "report output directory");

    // report
    auto* report_cmd = app.add_subcommand("report", "re-render a report directory");
    std::string report_in;
    report_cmd->add_option("--in", report_in, "report directory")->required();

    // presets
    auto* presets_cmd = app.add_subcommand("presets", "list preset configurations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            return cmd_train(train_model, train_flags, train_task, train_freeze, train_seed,
                             train_out, train_save);
        }
        if (eval_cmd->parsed()) return cmd_evaluate(eval_ckpt, eval_task);
        if (count_cmd->parsed()) {
            return cmd_count_params(count_preset, count_freeze, count_expect,
                                    expect_opt->count() > 0, count_csv);
        }
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_grid, ablate_jobs, ablate_out);
        if (report_cmd->parsed()) return cmd_report(report_in);
        if (presets_cmd->parsed()) {
            for (const auto& name : preset_names()) {
                const ModelConfig c = preset(name);
                const ParamBudget b = count_budget(c, {});
                std::cout << name << ": vocab=" << c.vocab_size << " d_model=" << c.d_model
                          << " d_ff=" << c.d_ff << " heads=" << c.n_heads
                          << " enc=" << c.n_enc_layers << " dec=" << c.n_dec_layers
                          << " mode=" << to_string(c.mode) << " params=" << b.total << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
