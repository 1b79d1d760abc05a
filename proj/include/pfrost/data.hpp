#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pfrost {

// Token <-> id bijection with fixed reserved ids. Deterministic from the
// corpus: most frequent tokens first, ties broken lexicographically.
class Vocab {
public:
    enum class Level { character, word };

    static constexpr int pad_id = 0;
    static constexpr int bos_id = 1;
    static constexpr int eos_id = 2;
    static constexpr int unk_id = 3;
    static constexpr int reserved = 4;

    static Vocab build(const std::vector<std::string>& lines, Level level,
                       size_t max_size);

    size_t size() const { return tokens_.size(); }
    Level level() const { return level_; }

    // Tokenizes one line (no BOS/EOS added); unknown tokens map to unk_id.
    std::vector<int> encode(const std::string& line) const;
    std::string decode(const std::vector<int>& ids) const;  // skips reserved ids

    int id_of(const std::string& token) const;  // unk_id if absent
    const std::string& token_of(int id) const;

    // One token per line; line number == id - reserved.
    std::string serialize() const;
    static Vocab deserialize(const std::string& text, Level level);

private:
    Level level_ = Level::word;
    std::vector<std::string> tokens_;  // index == id; 0..3 are markers
    std::vector<std::pair<std::string, int>> lookup_;  // sorted token -> id

    void rebuild_lookup();
    static std::vector<std::string> split_tokens(const std::string& line, Level level);
};

// Aligned source/target id sequences (one split; datasets carry a train and
// a dev corpus). Sequences exclude BOS/EOS; batching adds them.
struct ParallelCorpus {
    std::vector<std::vector<int>> src;
    std::vector<std::vector<int>> tgt;
    size_t size() const { return src.size(); }
};

struct MonoCorpus {
    std::vector<std::vector<int>> lines;
    size_t size() const { return lines.size(); }
};

enum class SyntheticTask { copy, reverse, substitute_shift };

SyntheticTask synthetic_task_from_string(const std::string& s);
const char* to_string(SyntheticTask t);

struct SyntheticSpec {
    SyntheticTask task = SyntheticTask::copy;
    size_t n_pairs = 0;
    size_t n_dev = 64;
    size_t len_lo = 1;
    size_t len_hi = 8;
    size_t alphabet_size = 8;  // single letters a.., at most 26
    size_t shift_k = 1;        // substitute_shift only
    uint64_t seed = 0;
};

struct MtDataset {
    Vocab vocab;
    ParallelCorpus train;
    ParallelCorpus dev;
    std::vector<std::string> dev_src_lines;  // raw text, for reports
};

// Deterministic synthetic translation data. substitute_shift maps token i
// to (i + k) mod alphabet_size and reverses the sequence, so solving it
// needs both a lexical mapping and reordering. Dev sources are disjoint
// from train sources.
MtDataset gen_synthetic_translation(const SyntheticSpec& spec);

struct LmDataset {
    Vocab vocab;
    MonoCorpus train;
    MonoCorpus dev;
};

// Character-level LM data from a plain-text corpus: the first dev_lines
// lines become the dev set, the rest the training set.
LmDataset load_lm_corpus(const std::vector<std::string>& lines, size_t dev_lines,
                         size_t max_vocab = 512);
LmDataset load_lm_corpus_file(const std::string& path, size_t dev_lines,
                              size_t max_vocab = 512);

// Deterministic synthetic text for desk-scale language modelling: sentences
// drawn from a fixed generated word inventory, so a character model has
// spellings and transitions to learn. n_letters controls the character
// inventory (up to 26).
std::vector<std::string> gen_synthetic_text(size_t n_lines, size_t n_words,
                                            uint64_t seed, size_t n_letters = 12);

// Padded batch. Masks are true exactly at non-PAD positions, and
// tgt_out[t] == tgt_in[t + 1] for consecutive real positions (tgt_in starts
// with BOS, tgt_out ends with EOS).
struct Batch {
    std::vector<std::vector<int>> src;       // empty in LM mode
    std::vector<std::vector<int>> tgt_in;
    std::vector<std::vector<int>> tgt_out;
    std::vector<std::vector<uint8_t>> src_mask;
    std::vector<std::vector<uint8_t>> tgt_mask;
    size_t size() const { return tgt_in.size(); }
};

// Deterministic shuffle per (seed, epoch), padding to the per-batch maximum
// length.
std::vector<Batch> batch_iter(const ParallelCorpus& corpus, size_t batch_size,
                              uint64_t seed, uint64_t epoch);
std::vector<Batch> batch_iter(const MonoCorpus& corpus, size_t batch_size,
                              uint64_t seed, uint64_t epoch);

std::vector<std::string> read_lines(const std::string& path);

}  // namespace pfrost
