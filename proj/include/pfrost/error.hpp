#pragma once

#include <stdexcept>
#include <string>

namespace pfrost {

// Shape/dimension violations (mismatched matmul operands, zero dims, ...).
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Out-of-range token ids or row indices.
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model / experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Corpus / vocabulary problems (empty corpus, malformed files).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Freeze-spec problems: empty selection, overlap, unsupported init.
struct FreezeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric preconditions (empty hypothesis set, empty corpus).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optimizer state inconsistent with the trainable parameter set.
struct OptimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss during training; carries the global step index.
struct TrainingDiverged : std::runtime_error {
    long long step;
    TrainingDiverged(long long step_, const std::string& msg)
        : std::runtime_error(msg), step(step_) {}
};

}  // namespace pfrost
