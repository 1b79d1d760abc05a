#pragma once

#include <cstddef>
#include <string>

namespace pfrost {

enum class Mode { translation, language_model };

// Architecture hyperparameters. d_kq and d_v are per-head widths for the
// key/query and value/output projections; 0 means the default d_model /
// n_heads (in which case n_heads must divide d_model).
struct ModelConfig {
    size_t vocab_size = 0;
    size_t d_model = 0;
    size_t d_ff = 0;
    size_t n_heads = 0;
    size_t d_kq = 0;
    size_t d_v = 0;
    size_t n_enc_layers = 0;
    size_t n_dec_layers = 0;
    Mode mode = Mode::translation;
    size_t max_len = 256;

    size_t head_kq() const { return d_kq ? d_kq : d_model / n_heads; }
    size_t head_v() const { return d_v ? d_v : d_model / n_heads; }
    size_t kq_total() const { return n_heads * head_kq(); }
    size_t v_total() const { return n_heads * head_v(); }

    // Throws ConfigError naming the violated constraint.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

}  // namespace pfrost
