#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfrost/accounting.hpp"
#include "pfrost/data.hpp"
#include "pfrost/trainer.hpp"

namespace pfrost {

// What a grid trains on: synthetic translation, synthetic LM text, or an
// LM corpus file.
struct TaskSpec {
    enum class Kind { mt_synthetic, lm_synthetic, lm_file };
    Kind kind = Kind::mt_synthetic;

    SyntheticSpec mt;  // mt_synthetic

    size_t lm_lines = 600;  // lm_synthetic
    size_t lm_words = 40;
    uint64_t lm_seed = 11;

    std::string lm_path;  // lm_file
    size_t lm_dev_lines = 200;
    size_t lm_max_vocab = 512;

    bool is_lm() const { return kind != Kind::mt_synthetic; }
    std::string str() const;
};

// One grid row: a freeze configuration plus its full-scale ratio
// expectation.
struct GridRow {
    std::string id;
    std::string label;
    std::string freeze;
    std::optional<double> expect_ratio;
};

struct TrendAssert {
    std::string metric;  // "bleu" or "ppl"
    std::string row_a;
    std::string row_b;
    char dir = '>';  // median(row_a) <dir> median(row_b)
};

// A full experiment grid: desk-scale model dimensions, paper-exact freeze
// specs, and ratio expectations checked against a full-size preset.
struct GridSpec {
    std::string name;
    ModelConfig model;  // vocab_size filled from the task data when 0
    std::string ratio_preset;  // full-scale preset for ratio checks; "" disables
    TaskSpec task;
    TrainConfig train;
    std::vector<uint64_t> seeds;
    std::vector<GridRow> rows;
    std::vector<TrendAssert> trends;

    static GridSpec parse_file(const std::string& path);
    static GridSpec parse(const std::string& text, const std::string& name_hint);
};

struct RunOutcome {
    bool ok = false;
    RunRecord record;
    std::string error;  // divergence or other failure
};

struct RowSummary {
    GridRow row;
    std::vector<RunOutcome> per_seed;
    std::optional<double> median_bleu;
    double median_ppl = 0.0;
    double toy_ratio = 1.0;     // ratio of the trained desk-scale model
    double preset_ratio = 1.0;  // ratio of (ratio_preset, freeze)
    std::optional<double> ratio_delta;  // |preset_ratio - expect_ratio|
    bool ratio_ok = true;
    bool failed = false;  // any seed diverged
};

struct TrendResult {
    TrendAssert spec;
    double value_a = 0.0;
    double value_b = 0.0;
    double margin = 0.0;
    bool pass = false;
    std::string describe() const;
};

struct GridReport {
    std::string grid_name;
    std::vector<uint64_t> seeds;
    std::vector<RowSummary> rows;
    std::vector<TrendResult> trends;
    std::vector<std::string> hard_failures;
    std::vector<std::string> warnings;

    // 0: all checks pass; 1: a hard check failed (ratio mismatch, diverged
    // row, internal invariant); 2: trend warnings only.
    int exit_code() const;

    std::string runs_csv() const;     // per (row, seed); no wall clock
    std::string summary_csv() const;  // per row medians, ratio and trend checks
    std::string markdown() const;

    const RowSummary& row(const std::string& id) const;
};

// Median over seeds of a row's metric ("bleu" or "ppl").
double row_median(const GridReport& report, const std::string& row_id,
                  const std::string& metric);

// Compares seed-medians of two rows; records the margin. A row compared
// with itself passes with zero margin.
TrendResult assert_ordering(const GridReport& report, const std::string& row_a,
                            const std::string& row_b, const std::string& metric,
                            char dir);

// Runs every (row, seed) pair on a shared worker pool, aggregates medians,
// evaluates ratio checks and trend assertions, and (when out_dir is
// non-empty) writes runs.csv, summary.csv, report.md, timings.csv and
// per-run metrics files. A diverging run marks its row failed; the grid
// continues. jobs == 0 picks a default; the PFROST_THREADS environment
// variable caps the pool.
GridReport run_grid(const GridSpec& grid, int jobs = 0, const std::string& out_dir = "");

// Re-renders report.md from runs.csv / summary.csv in a report directory.
std::string render_report_dir(const std::string& dir);

// Builds the task's dataset (deterministic for a given spec).
MtDataset build_mt_dataset(const TaskSpec& task);
LmDataset build_lm_dataset(const TaskSpec& task);

// Parses a task description like "mt kind=substitute_shift alphabet=12
// shift=3 pairs=500 dev=48 len=4..9 data_seed=7" or "lm source=synthetic
// lines=600 words=40 dev=60".
TaskSpec parse_task_spec(const std::string& text);

int effective_jobs(int requested);

}  // namespace pfrost
