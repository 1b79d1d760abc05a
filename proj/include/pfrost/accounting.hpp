#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfrost/config.hpp"
#include "pfrost/freezing.hpp"

namespace pfrost {

// Parameter budget for one (config, freeze spec) pair. ratio is exactly
// trainable / total.
struct ParamBudget {
    std::map<Group, size_t> per_group;
    std::map<std::string, size_t> per_selector;  // selector text -> frozen params
    size_t total = 0;
    size_t trainable = 0;
    double ratio = 1.0;
};

// Counts by walking the same registry the model builder produces (metadata
// only, so full-size presets cost nothing), then applying the freeze spec.
ParamBudget count_budget(const ModelConfig& cfg, const FreezeSpec& spec);

struct RatioEntry {
    std::string label;
    std::string preset;  // preset name, resolved via presets()
    std::string freeze;  // selector list text
    std::optional<double> expected;
};

struct RatioRow {
    std::string label;
    std::string preset;
    std::string freeze;
    size_t total = 0;
    size_t trainable = 0;
    double ratio = 1.0;
    std::optional<double> expected;
    std::optional<double> delta;  // |ratio - expected|
};

struct RatioTable {
    std::vector<RatioRow> rows;
    std::string to_csv() const;
    std::string to_text() const;  // aligned columns
    // Largest |ratio - expected| over rows that carry an expectation.
    double max_delta() const;
};

RatioTable ratio_table(const std::vector<RatioEntry>& grid);

// ---- preset registry -------------------------------------------------------
// The paper-scale configurations used for budget checks. Keys:
//   big, big_emb128, big_ffn1024, big_att8, base, student, lm_base,
//   big_diag, big_schedule (the last two share big's architecture; they
//   exist so grids can name the configuration they ablate).
const std::map<std::string, ModelConfig>& presets();
ModelConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace pfrost
