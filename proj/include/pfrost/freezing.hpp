#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfrost/tag.hpp"

namespace pfrost {

enum class InitKind { glorot, diagonal };

// One component selector. Paths: emb, att, ffn, att.self, att.context,
// att.enc, att.dec, ffn.enc, ffn.dec. A negated selector matches the
// complement of its path within the EMB/ATT/FFN taxonomy (OTHER parameters
// are never selectable). att.enc is encoder self-attention; att.dec covers
// decoder self and context attention.
struct Selector {
    std::string path;
    bool negated = false;
    InitKind init = InitKind::glorot;

    bool matches(const ComponentTag& tag) const;
    std::string str() const;
};

// Declarative freeze selection. freeze_at_epoch == 0 (or unset) means frozen
// from initialization; E > 0 means the selection trains during epochs
// 0..E-1 and is frozen at the start of epoch E.
struct FreezeSpec {
    std::vector<Selector> selectors;
    std::optional<int> freeze_at_epoch;

    // Parses a comma-separated selector list, e.g. "att@diag", "emb,ffn",
    // "att.self@epoch=2". An empty string is the empty spec.
    static FreezeSpec parse(const std::string& text);
    std::string str() const;
    bool empty() const { return selectors.empty(); }
};

struct FreezeReport {
    std::vector<std::string> affected;      // frozen parameter names
    std::map<Group, size_t> frozen_per_group;  // parameter counts
    size_t total_params = 0;
    size_t trainable_params = 0;
    double ratio = 1.0;  // trainable / all
    bool deferred = false;  // selection validated but freezing deferred to an epoch hook
    std::vector<std::string> warnings;
};

// Resolves the spec against a registry: validates selector syntax, rejects
// empty or overlapping selections, and returns the matched names per
// selector (in registry order).
std::vector<std::vector<std::string>> resolve_selectors(const ParameterRegistry& reg,
                                                        const FreezeSpec& spec);

// Re-initializes the selected weight matrices per the selector's init kind
// (diagonal init rewrites every query/key/value/output or ffn_in/ffn_out
// matrix in the selection; Glorot keeps the build-time draw) and, unless
// the spec defers to an epoch, marks the selection untrainable. Applying
// the same spec twice equals applying it once.
FreezeReport apply_freeze(ParameterRegistry& reg, const FreezeSpec& spec);

// Epoch-boundary hook: at the start of epoch spec.freeze_at_epoch the
// selection flips to untrainable. Calling it later than that epoch freezes
// anyway and carries a warning in the report. Returns the names frozen by
// this call (empty when nothing changed) so the caller can discard
// optimizer state for them.
FreezeReport freeze_at_epoch_hook(ParameterRegistry& reg, const FreezeSpec& spec,
                                  int current_epoch);

}  // namespace pfrost
