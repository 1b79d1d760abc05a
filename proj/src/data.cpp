#include "pfrost/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pfrost/error.hpp"
#include "pfrost/rng.hpp"

namespace pfrost {

// ---- vocab -----------------------------------------------------------------

namespace {
const char* kReservedTokens[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

std::vector<std::string> Vocab::split_tokens(const std::string& line, Level level) {
    std::vector<std::string> out;
    if (level == Level::word) {
        std::istringstream is(line);
        std::string w;
        while (is >> w) out.push_back(w);
        return out;
    }
    // character level: UTF-8 codepoints; malformed bytes pass through singly
    size_t i = 0;
    while (i < line.size()) {
        const unsigned char c = line[i];
        size_t n = 1;
        if ((c & 0xE0) == 0xC0) n = 2;
        else if ((c & 0xF0) == 0xE0) n = 3;
        else if ((c & 0xF8) == 0xF0) n = 4;
        if (i + n > line.size()) n = 1;
        out.push_back(line.substr(i, n));
        i += n;
    }
    return out;
}

Vocab Vocab::build(const std::vector<std::string>& lines, Level level, size_t max_size) {
    if (lines.empty()) throw DataError("build_vocab: empty corpus");
    std::map<std::string, size_t> freq;
    for (const std::string& line : lines) {
        for (const std::string& tok : split_tokens(line, level)) ++freq[tok];
    }
    if (freq.empty()) throw DataError("build_vocab: corpus has no tokens");

    std::vector<std::pair<std::string, size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // deterministic tie-break
    });

    Vocab v;
    v.level_ = level;
    for (const char* t : kReservedTokens) v.tokens_.push_back(t);
    const size_t keep = max_size > reserved ? max_size - reserved : 0;
    for (size_t i = 0; i < items.size() && i < keep; ++i) {
        v.tokens_.push_back(items[i].first);
    }
    v.rebuild_lookup();
    return v;
}

void Vocab::rebuild_lookup() {
    lookup_.clear();
    for (size_t i = reserved; i < tokens_.size(); ++i) {
        lookup_.emplace_back(tokens_[i], static_cast<int>(i));
    }
    std::sort(lookup_.begin(), lookup_.end());
}

int Vocab::id_of(const std::string& token) const {
    auto it = std::lower_bound(lookup_.begin(), lookup_.end(),
                               std::make_pair(token, 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != lookup_.end() && it->first == token) return it->second;
    return unk_id;
}

const std::string& Vocab::token_of(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= tokens_.size()) {
        throw IndexError("vocab: id " + std::to_string(id) + " out of range");
    }
    return tokens_[id];
}

std::vector<int> Vocab::encode(const std::string& line) const {
    std::vector<int> ids;
    for (const std::string& tok : split_tokens(line, level_)) ids.push_back(id_of(tok));
    return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
    std::string out;
    bool first = true;
    for (int id : ids) {
        if (id < reserved) continue;
        if (level_ == Level::word && !first) out += " ";
        out += token_of(id);
        first = false;
    }
    return out;
}

std::string Vocab::serialize() const {
    std::string out;
    for (size_t i = reserved; i < tokens_.size(); ++i) {
        out += tokens_[i];
        out += "\n";
    }
    return out;
}

Vocab Vocab::deserialize(const std::string& text, Level level) {
    Vocab v;
    v.level_ = level;
    for (const char* t : kReservedTokens) v.tokens_.push_back(t);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) v.tokens_.push_back(line);
    v.rebuild_lookup();
    return v;
}

// ---- synthetic translation ----------------------------------------------------

SyntheticTask synthetic_task_from_string(const std::string& s) {
    if (s == "copy") return SyntheticTask::copy;
    if (s == "reverse") return SyntheticTask::reverse;
    if (s == "substitute_shift") return SyntheticTask::substitute_shift;
    throw ConfigError("unknown synthetic task '" + s + "'");
}

const char* to_string(SyntheticTask t) {
    switch (t) {
        case SyntheticTask::copy: return "copy";
        case SyntheticTask::reverse: return "reverse";
        default: return "substitute_shift";
    }
}

namespace {

std::string letters_to_line(const std::vector<int>& letters) {
    std::string s;
    for (size_t i = 0; i < letters.size(); ++i) {
        if (i) s += " ";
        s += static_cast<char>('a' + letters[i]);
    }
    return s;
}

std::vector<int> transform_letters(const std::vector<int>& src, SyntheticTask task,
                                   size_t alphabet, size_t k) {
    std::vector<int> tgt = src;
    switch (task) {
        case SyntheticTask::copy:
            break;
        case SyntheticTask::reverse:
            std::reverse(tgt.begin(), tgt.end());
            break;
        case SyntheticTask::substitute_shift:
            for (int& t : tgt) t = static_cast<int>((t + k) % alphabet);
            std::reverse(tgt.begin(), tgt.end());
            break;
    }
    return tgt;
}

}  // namespace

MtDataset gen_synthetic_translation(const SyntheticSpec& spec) {
    if (spec.alphabet_size < 2) throw ConfigError("synthetic data: alphabet_size must be >= 2");
    if (spec.alphabet_size > 26) throw ConfigError("synthetic data: alphabet_size is capped at 26");
    if (spec.len_lo < 1 || spec.len_lo > spec.len_hi) {
        throw ConfigError("synthetic data: invalid length range [" +
                          std::to_string(spec.len_lo) + "," + std::to_string(spec.len_hi) + "]");
    }
    if (spec.n_pairs == 0) throw ConfigError("synthetic data: n_pairs must be positive");

    Rng rng(mix_seed(spec.seed, "synthetic_translation"));
    auto draw_letters = [&]() {
        const size_t len = spec.len_lo + rng.index(spec.len_hi - spec.len_lo + 1);
        std::vector<int> letters(len);
        for (int& l : letters) l = static_cast<int>(rng.index(spec.alphabet_size));
        return letters;
    };

    std::vector<std::string> src_lines, tgt_lines;
    std::set<std::string> train_sources;
    for (size_t i = 0; i < spec.n_pairs; ++i) {
        const auto letters = draw_letters();
        src_lines.push_back(letters_to_line(letters));
        tgt_lines.push_back(letters_to_line(
            transform_letters(letters, spec.task, spec.alphabet_size, spec.shift_k)));
        train_sources.insert(src_lines.back());
    }

    std::vector<std::string> dev_src_lines, dev_tgt_lines;
    std::set<std::string> dev_sources;
    size_t attempts = 0;
    const size_t max_attempts = 200 * (spec.n_dev + 1);
    while (dev_src_lines.size() < spec.n_dev && attempts < max_attempts) {
        ++attempts;
        const auto letters = draw_letters();
        const std::string line = letters_to_line(letters);
        if (train_sources.count(line) || dev_sources.count(line)) continue;
        dev_sources.insert(line);
        dev_src_lines.push_back(line);
        dev_tgt_lines.push_back(letters_to_line(
            transform_letters(letters, spec.task, spec.alphabet_size, spec.shift_k)));
    }
    if (dev_src_lines.size() < spec.n_dev) {
        throw DataError("synthetic data: could not draw a dev set disjoint from train; "
                        "task space too small");
    }

    MtDataset ds;
    std::vector<std::string> all = src_lines;
    all.insert(all.end(), tgt_lines.begin(), tgt_lines.end());
    ds.vocab = Vocab::build(all, Vocab::Level::word, spec.alphabet_size + Vocab::reserved);
    auto encode_all = [&](const std::vector<std::string>& lines) {
        std::vector<std::vector<int>> out;
        out.reserve(lines.size());
        for (const auto& l : lines) out.push_back(ds.vocab.encode(l));
        return out;
    };
    ds.train.src = encode_all(src_lines);
    ds.train.tgt = encode_all(tgt_lines);
    ds.dev.src = encode_all(dev_src_lines);
    ds.dev.tgt = encode_all(dev_tgt_lines);
    ds.dev_src_lines = std::move(dev_src_lines);
    return ds;
}

// ---- language-model corpora -----------------------------------------------------

std::vector<std::string> gen_synthetic_text(size_t n_lines, size_t n_words,
                                            uint64_t seed) {
    if (n_lines == 0 || n_words == 0) {
        throw ConfigError("synthetic text: line and word counts must be positive");
    }
    Rng rng(mix_seed(seed, "synthetic_text"));
    // Fixed word inventory over a 12-letter alphabet.
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < n_words) {
        const size_t len = 3 + rng.index(4);
        std::string w;
        for (size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng.index(12));
        if (seen.insert(w).second) words.push_back(w);
    }
    std::vector<std::string> lines;
    lines.reserve(n_lines);
    for (size_t i = 0; i < n_lines; ++i) {
        const size_t len = 4 + rng.index(6);
        std::string line;
        for (size_t j = 0; j < len; ++j) {
            if (j) line += " ";
            line += words[rng.index(words.size())];
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

LmDataset load_lm_corpus(const std::vector<std::string>& lines, size_t dev_lines,
                         size_t max_vocab) {
    if (lines.empty()) throw DataError("lm corpus: empty corpus");
    if (dev_lines == 0 || dev_lines >= lines.size()) {
        throw DataError("lm corpus: dev split must leave a non-empty train set");
    }
    std::vector<std::string> dev(lines.begin(), lines.begin() + dev_lines);
    std::vector<std::string> train(lines.begin() + dev_lines, lines.end());

    LmDataset ds;
    ds.vocab = Vocab::build(train, Vocab::Level::character, max_vocab);
    for (const auto& l : train) ds.train.lines.push_back(ds.vocab.encode(l));
    for (const auto& l : dev) ds.dev.lines.push_back(ds.vocab.encode(l));
    return ds;
}

LmDataset load_lm_corpus_file(const std::string& path, size_t dev_lines, size_t max_vocab) {
    return load_lm_corpus(read_lines(path), dev_lines, max_vocab);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// ---- batching ----------------------------------------------------------------------

namespace {

std::vector<std::vector<size_t>> shuffled_chunks(size_t n, size_t batch_size,
                                                 uint64_t seed, uint64_t epoch) {
    if (batch_size == 0) throw ConfigError("batch_iter: batch_size must be >= 1");
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0x9e37 + epoch));
    rng.shuffle(order);
    std::vector<std::vector<size_t>> chunks;
    for (size_t i = 0; i < n; i += batch_size) {
        chunks.emplace_back(order.begin() + i,
                            order.begin() + std::min(n, i + batch_size));
    }
    return chunks;
}

void fill_target_rows(Batch& b, const std::vector<std::vector<int>>& tgt,
                      const std::vector<size_t>& idx) {
    size_t max_t = 0;
    for (size_t i : idx) max_t = std::max(max_t, tgt[i].size() + 1);
    for (size_t i : idx) {
        const auto& t = tgt[i];
        std::vector<int> tin(max_t, Vocab::pad_id), tout(max_t, Vocab::pad_id);
        std::vector<uint8_t> mask(max_t, 0);
        tin[0] = Vocab::bos_id;
        for (size_t j = 0; j < t.size(); ++j) {
            tin[j + 1] = t[j];
            tout[j] = t[j];
        }
        tout[t.size()] = Vocab::eos_id;
        for (size_t j = 0; j <= t.size(); ++j) mask[j] = 1;
        b.tgt_in.push_back(std::move(tin));
        b.tgt_out.push_back(std::move(tout));
        b.tgt_mask.push_back(std::move(mask));
    }
}

}  // namespace

std::vector<Batch> batch_iter(const ParallelCorpus& corpus, size_t batch_size,
                              uint64_t seed, uint64_t epoch) {
    auto chunks = shuffled_chunks(corpus.size(), batch_size, seed, epoch);
    std::vector<Batch> batches;
    for (const auto& idx : chunks) {
        Batch b;
        size_t max_s = 0;
        for (size_t i : idx) max_s = std::max(max_s, corpus.src[i].size() + 1);
        for (size_t i : idx) {
            const auto& s = corpus.src[i];
            std::vector<int> row(max_s, Vocab::pad_id);
            std::vector<uint8_t> mask(max_s, 0);
            for (size_t j = 0; j < s.size(); ++j) row[j] = s[j];
            row[s.size()] = Vocab::eos_id;
            for (size_t j = 0; j <= s.size(); ++j) mask[j] = 1;
            b.src.push_back(std::move(row));
            b.src_mask.push_back(std::move(mask));
        }
        fill_target_rows(b, corpus.tgt, idx);
        batches.push_back(std::move(b));
    }
    return batches;
}

std::vector<Batch> batch_iter(const MonoCorpus& corpus, size_t batch_size,
                              uint64_t seed, uint64_t epoch) {
    auto chunks = shuffled_chunks(corpus.size(), batch_size, seed, epoch);
    std::vector<Batch> batches;
    for (const auto& idx : chunks) {
        Batch b;
        fill_target_rows(b, corpus.lines, idx);
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace pfrost
