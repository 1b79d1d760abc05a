#include "pfrost/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pfrost/error.hpp"

namespace pfrost {

namespace {

constexpr char kMagic[8] = {'P', 'F', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_str(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
    const uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void write_opt_int(std::ostream& os, const std::optional<int>& v) {
    const uint8_t has = v.has_value() ? 1 : 0;
    os.put(static_cast<char>(has));
    if (v) write_u64(os, static_cast<uint64_t>(*v));
}

std::optional<int> read_opt_int(std::istream& is) {
    if (is.get() == 0) return std::nullopt;
    return static_cast<int>(read_u64(is));
}

}  // namespace

void save_checkpoint(const std::string& path, const TransformerModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot write '" + path + "'");
    os.write(kMagic, sizeof(kMagic));
    const ModelConfig& c = model.config();
    write_u64(os, c.vocab_size);
    write_u64(os, c.d_model);
    write_u64(os, c.d_ff);
    write_u64(os, c.n_heads);
    write_u64(os, c.d_kq);
    write_u64(os, c.d_v);
    write_u64(os, c.n_enc_layers);
    write_u64(os, c.n_dec_layers);
    write_u64(os, c.max_len);
    os.put(c.mode == Mode::translation ? 0 : 1);

    const auto& params = model.registry().params();
    write_u64(os, params.size());
    for (const Parameter& p : params) {
        write_str(os, p.name);
        write_u64(os, p.shape.size());
        for (size_t d : p.shape) write_u64(os, d);
        os.put(static_cast<char>(p.tag.group));
        os.put(static_cast<char>(p.tag.side));
        os.put(static_cast<char>(p.tag.att_kind ? 1 + static_cast<int>(*p.tag.att_kind) : 0));
        write_opt_int(os, p.tag.layer_index);
        os.put(static_cast<char>(p.tag.matrix_role ? 1 + static_cast<int>(*p.tag.matrix_role) : 0));
        os.put(p.trainable ? 1 : 0);
        const auto& data = p.tensor.data();
        os.write(reinterpret_cast<const char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)));
    }
    if (!os) throw DataError("checkpoint: write failed for '" + path + "'");
}

TransformerModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot read '" + path + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("checkpoint: '" + path + "' is not a checkpoint file");
    }
    ModelConfig c;
    c.vocab_size = read_u64(is);
    c.d_model = read_u64(is);
    c.d_ff = read_u64(is);
    c.n_heads = read_u64(is);
    c.d_kq = read_u64(is);
    c.d_v = read_u64(is);
    c.n_enc_layers = read_u64(is);
    c.n_dec_layers = read_u64(is);
    c.max_len = read_u64(is);
    c.mode = is.get() == 0 ? Mode::translation : Mode::language_model;

    TransformerModel model(c, /*seed=*/0);
    const uint64_t count = read_u64(is);
    if (count != model.registry().size()) {
        throw DataError("checkpoint: parameter count mismatch");
    }
    for (uint64_t i = 0; i < count; ++i) {
        const std::string name = read_str(is);
        const uint64_t ndims = read_u64(is);
        std::vector<size_t> shape(ndims);
        for (auto& d : shape) d = read_u64(is);
        ComponentTag tag;
        tag.group = static_cast<Group>(is.get());
        tag.side = static_cast<Side>(is.get());
        const int att = is.get();
        if (att) tag.att_kind = static_cast<AttKind>(att - 1);
        tag.layer_index = read_opt_int(is);
        const int role = is.get();
        if (role) tag.matrix_role = static_cast<MatrixRole>(role - 1);
        const bool trainable = is.get() != 0;

        Parameter& p = model.registry().at(name);
        if (p.shape != shape) {
            throw DataError("checkpoint: shape mismatch for parameter '" + name + "'");
        }
        auto& data = p.tensor.data();
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        p.tag = tag;
        p.set_trainable(trainable);
    }
    if (!is) throw DataError("checkpoint: truncated file '" + path + "'");
    return model;
}

}  // namespace pfrost
