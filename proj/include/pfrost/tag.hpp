#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pfrost/tensor.hpp"

namespace pfrost {

// The three-way component taxonomy plus OTHER for everything that does not
// belong to it (layer norms and bias vectors).
enum class Group { EMB, ATT, FFN, OTHER };

enum class Side { encoder, decoder, shared };

enum class AttKind { self, context };

enum class MatrixRole {
    query,
    key,
    value,
    output,
    ffn_in,
    ffn_out,
    norm_gain,
    norm_bias,
    bias,
};

const char* to_string(Group g);
const char* to_string(Side s);
const char* to_string(AttKind k);
const char* to_string(MatrixRole r);

// Locates a parameter in the component taxonomy. att_kind is present iff
// group == ATT; context attention only exists on the decoder side.
struct ComponentTag {
    Group group = Group::OTHER;
    Side side = Side::shared;
    std::optional<AttKind> att_kind;
    std::optional<int> layer_index;
    std::optional<MatrixRole> matrix_role;

    void validate() const;
    std::string describe() const;
    bool operator==(const ComponentTag&) const = default;
};

// A named model parameter. `shape` is authoritative so that a registry can
// exist without materialized tensors (used for parameter accounting at
// full scale). When the tensor is materialized, trainable and
// tensor.requires_grad are kept in sync.
struct Parameter {
    std::string name;
    std::vector<size_t> shape;
    ComponentTag tag;
    Tensor tensor;  // undefined in a metadata-only registry
    bool trainable = true;

    size_t numel() const {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return n;
    }
    bool materialized() const { return tensor.defined(); }
    void set_trainable(bool v);
};

// Ordered collection of all model parameters; every parameter appears in
// exactly one entry.
class ParameterRegistry {
public:
    Parameter& add(Parameter p);
    bool contains(const std::string& name) const;
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;

    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    size_t size() const { return params_.size(); }

    size_t total_count() const;
    size_t trainable_count() const;
    size_t group_count(Group g) const;

private:
    std::vector<Parameter> params_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace pfrost
