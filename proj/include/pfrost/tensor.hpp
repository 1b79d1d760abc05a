#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pfrost {

// Dense 64-bit float tensor with an optional gradient buffer. Copies are
// shallow: a Tensor is a shared handle to its storage, which is what lets
// tape nodes hold inputs and outputs of recorded operations.
//
// Gradient buffers exist only for requires_grad tensors and are allocated
// lazily during the backward pass.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<size_t> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return d_ != nullptr; }

    const std::vector<size_t>& shape() const;
    size_t ndim() const { return shape().size(); }
    size_t numel() const;
    // 2-D convenience; rows() of a 1-D tensor is 1.
    size_t rows() const;
    size_t cols() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    double& at(size_t r, size_t c);
    double at(size_t r, size_t c) const;
    double item() const;  // scalar value; throws on numel != 1

    bool requires_grad() const;
    void set_requires_grad(bool v);

    bool has_grad() const;
    std::vector<double>& grad();              // throws if absent
    const std::vector<double>& grad() const;  // throws if absent
    void zero_grad();                         // zeroes in place if allocated
    void drop_grad();                         // releases the buffer

    // Adds g into the gradient buffer, allocating it first if needed.
    // No-op for requires_grad == false tensors: frozen weights never get
    // a gradient buffer. Const because a Tensor is a handle; backward
    // rules accumulate through the copies captured in tape nodes.
    void accumulate_grad(const std::vector<double>& g) const;

    // Identity of the underlying storage (for graph-debugging and tests).
    const void* storage_id() const { return d_.get(); }

private:
    struct Storage {
        std::vector<size_t> shape;
        std::vector<double> data;
        std::vector<double> grad;  // empty == absent
        bool requires_grad = false;
    };
    std::shared_ptr<Storage> d_;
    explicit Tensor(std::shared_ptr<Storage> d) : d_(std::move(d)) {}
    Storage& ref();
    const Storage& ref() const;
};

// Reverse-mode tape. Operations executed while a Tape is alive record one
// node each (in execution order, which is a topological order of the graph).
// backward() replays the nodes exactly once in reverse order.
//
// Constructing a Tape makes it current for this thread; destruction restores
// the previous one. One tape per training step, rebuilt every step.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* current();

    void record(std::function<void()> backward_fn);
    size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and propagates through all recorded nodes.
    // loss must be a scalar recorded on this tape.
    void backward(Tensor loss);

private:
    std::vector<std::function<void()>> nodes_;
    Tape* prev_ = nullptr;
};

// Boolean attention mask: keep[r*cols + c] != 0 means position (r, c) may
// be attended to. Lives outside the autodiff graph.
struct AttnMask {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<uint8_t> keep;

    static AttnMask causal(size_t n);
    static AttnMask all(size_t rows, size_t cols);
    bool at(size_t r, size_t c) const { return keep[r * cols + c] != 0; }
};

std::string shape_str(const std::vector<size_t>& shape);

// ---- Differentiable operations ------------------------------------------
// Each op computes its result eagerly and, when a tape is current and any
// input requires grad, records a backward rule. dA = dC B^T, dB = A^T dC
// style accumulation throughout; all loops are sequential, so gradients are
// bit-reproducible.

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n] -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T -> [m,n]
Tensor add(const Tensor& a, const Tensor& b);        // same shape
Tensor add_row(const Tensor& x, const Tensor& b);    // [t,d] + [d] per row
Tensor scale(const Tensor& x, double c);
Tensor relu(const Tensor& x);
Tensor sum(const Tensor& x);  // -> scalar

// Row-wise softmax with optional mask; masked entries are exactly zero.
// Requires at least one kept entry per row.
Tensor softmax_rows(const Tensor& x, const AttnMask* mask = nullptr);

// Normalizes the last axis to mean 0 / variance 1, then applies gain and
// bias. x is treated as [numel/d, d] with d = gain size.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-6);

// Mean negative log-softmax of targets over positions with
// target != ignore_index. logits: [t, v].
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                     int ignore_index = -1);

// Gathers rows of table: out[i] = table[ids[i]]. Backward scatters into the
// table rows, which is how the tied embedding collects gradients from all
// of its uses.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

Tensor col_slice(const Tensor& x, size_t c0, size_t width);
Tensor concat_cols(const std::vector<Tensor>& parts);

}  // namespace pfrost
