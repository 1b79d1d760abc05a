#include "pfrost/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfrost/error.hpp"

namespace pfrost {

namespace {

size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

}  // namespace

std::string shape_str(const std::vector<size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(std::vector<size_t> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<size_t> shape, double value, bool requires_grad) {
    for (size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_str(shape));
    }
    auto s = std::make_shared<Storage>();
    s->data.assign(shape_numel(shape), value);
    s->shape = std::move(shape);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

Tensor Tensor::from_data(std::vector<size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    for (size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_str(shape));
    }
    auto s = std::make_shared<Storage>();
    s->shape = std::move(shape);
    s->data = std::move(data);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor::Storage& Tensor::ref() {
    if (!d_) throw ShapeError("use of an undefined tensor");
    return *d_;
}

const Tensor::Storage& Tensor::ref() const {
    if (!d_) throw ShapeError("use of an undefined tensor");
    return *d_;
}

const std::vector<size_t>& Tensor::shape() const { return ref().shape; }
size_t Tensor::numel() const { return ref().data.size(); }

size_t Tensor::rows() const {
    const auto& s = ref().shape;
    return s.size() >= 2 ? s[0] : 1;
}

size_t Tensor::cols() const {
    const auto& s = ref().shape;
    if (s.empty()) return 1;
    return s.size() >= 2 ? s[1] : s[0];
}

std::vector<double>& Tensor::data() { return ref().data; }
const std::vector<double>& Tensor::data() const { return ref().data; }

double& Tensor::at(size_t r, size_t c) { return ref().data[r * cols() + c]; }
double Tensor::at(size_t r, size_t c) const { return ref().data[r * cols() + c]; }

double Tensor::item() const {
    if (numel() != 1) {
        throw ShapeError("item() requires a scalar, got shape " + shape_str(shape()));
    }
    return ref().data[0];
}

bool Tensor::requires_grad() const { return ref().requires_grad; }
void Tensor::set_requires_grad(bool v) {
    ref().requires_grad = v;
    if (!v) ref().grad.clear();
}

bool Tensor::has_grad() const { return !ref().grad.empty(); }

std::vector<double>& Tensor::grad() {
    if (!has_grad()) throw ShapeError("tensor has no gradient buffer");
    return ref().grad;
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw ShapeError("tensor has no gradient buffer");
    return ref().grad;
}

void Tensor::zero_grad() {
    auto& g = ref().grad;
    std::fill(g.begin(), g.end(), 0.0);
}

void Tensor::drop_grad() { ref().grad.clear(); }

void Tensor::accumulate_grad(const std::vector<double>& g) const {
    if (!d_) throw ShapeError("use of an undefined tensor");
    Storage& s = *d_;  // shared_ptr does not propagate const to the storage
    if (!s.requires_grad) return;
    if (g.size() != s.data.size()) {
        throw ShapeError("gradient size mismatch: " + std::to_string(g.size()) +
                         " vs " + std::to_string(s.data.size()));
    }
    if (s.grad.empty()) s.grad.assign(s.data.size(), 0.0);
    for (size_t i = 0; i < g.size(); ++i) s.grad[i] += g[i];
}

// ---- Tape -------------------------------------------------------------------

namespace {
thread_local Tape* g_current_tape = nullptr;
}

Tape::Tape() : prev_(g_current_tape) { g_current_tape = this; }

Tape::~Tape() { g_current_tape = prev_; }

Tape* Tape::current() { return g_current_tape; }

void Tape::record(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
}

void Tape::backward(Tensor loss) {
    if (loss.numel() != 1) {
        throw ShapeError("backward requires a scalar loss, got shape " +
                         shape_str(loss.shape()));
    }
    if (!loss.requires_grad()) return;  // nothing reachable is trainable
    loss.accumulate_grad({1.0});
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

// ---- Masks ------------------------------------------------------------------

AttnMask AttnMask::causal(size_t n) {
    AttnMask m;
    m.rows = m.cols = n;
    m.keep.assign(n * n, 0);
    for (size_t r = 0; r < n; ++r) {
        for (size_t c = 0; c <= r; ++c) m.keep[r * n + c] = 1;
    }
    return m;
}

AttnMask AttnMask::all(size_t rows, size_t cols) {
    AttnMask m;
    m.rows = rows;
    m.cols = cols;
    m.keep.assign(rows * cols, 1);
    return m;
}

// ---- Op helpers --------------------------------------------------------------

namespace {

bool should_record(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::current()) return false;
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

void require_2d(const Tensor& t, const char* op) {
    if (t.ndim() != 2) {
        throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " +
                         shape_str(t.shape()));
    }
}

}  // namespace

// ---- matmul -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = out.data().data();
    for (size_t i = 0; i < m; ++i) {
        for (size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            if (av == 0.0) continue;
            for (size_t j = 0; j < n; ++j) pc[i * n + j] += av * pb[p * n + j];
        }
    }
    if (should_record({&a, &b})) {
        out.set_requires_grad(true);
        Tape::current()->record([a, b, out, m, k, n]() {
            if (!out.has_grad()) return;
            const auto& dc = out.grad();
            if (a.requires_grad()) {
                std::vector<double> da(m * k, 0.0);  // dA = dC B^T
                const double* pb2 = b.data().data();
                for (size_t i = 0; i < m; ++i) {
                    for (size_t j = 0; j < k; ++j) {
                        double s = 0.0;
                        for (size_t p = 0; p < n; ++p) s += dc[i * n + p] * pb2[j * n + p];
                        da[i * k + j] = s;
                    }
                }
                a.accumulate_grad(da);
            }
            if (b.requires_grad()) {
                std::vector<double> db(k * n, 0.0);  // dB = A^T dC
                const double* pa2 = a.data().data();
                for (size_t i = 0; i < k; ++i) {
                    for (size_t j = 0; j < n; ++j) {
                        double s = 0.0;
                        for (size_t p = 0; p < m; ++p) s += pa2[p * k + i] * dc[p * n + j];
                        db[i * n + j] = s;
                    }
                }
                b.accumulate_grad(db);
            }
        });
    }
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_nt");
    require_2d(b, "matmul_nt");
    const size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw ShapeError("matmul_nt: inner dimensions disagree, " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()) + "^T");
    }
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = out.data().data();
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t p = 0; p < k; ++p) s += pa[i * k + p] * pb[j * k + p];
            pc[i * n + j] = s;
        }
    }
    if (should_record({&a, &b})) {
        out.set_requires_grad(true);
        Tape::current()->record([a, b, out, m, k, n]() {
            if (!out.has_grad()) return;
            const auto& dc = out.grad();
            if (a.requires_grad()) {
                std::vector<double> da(m * k, 0.0);  // dA = dC B
                const double* pb2 = b.data().data();
                for (size_t i = 0; i < m; ++i) {
                    for (size_t p = 0; p < n; ++p) {
                        const double dv = dc[i * n + p];
                        if (dv == 0.0) continue;
                        for (size_t j = 0; j < k; ++j) da[i * k + j] += dv * pb2[p * k + j];
                    }
                }
                a.accumulate_grad(da);
            }
            if (b.requires_grad()) {
                std::vector<double> db(n * k, 0.0);  // dB = dC^T A
                const double* pa2 = a.data().data();
                for (size_t p = 0; p < m; ++p) {
                    for (size_t i = 0; i < n; ++i) {
                        const double dv = dc[p * n + i];
                        if (dv == 0.0) continue;
                        for (size_t j = 0; j < k; ++j) db[i * k + j] += dv * pa2[p * k + j];
                    }
                }
                b.accumulate_grad(db);
            }
        });
    }
    return out;
}

// ---- elementwise ---------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros(a.shape());
    for (size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (should_record({&a, &b})) {
        out.set_requires_grad(true);
        Tape::current()->record([a, b, out]() {
            if (!out.has_grad()) return;
            if (a.requires_grad()) a.accumulate_grad(out.grad());
            if (b.requires_grad()) b.accumulate_grad(out.grad());
        });
    }
    return out;
}

Tensor add_row(const Tensor& x, const Tensor& b) {
    require_2d(x, "add_row");
    const size_t t = x.rows(), d = x.cols();
    if (b.numel() != d) {
        throw ShapeError("add_row: bias size " + std::to_string(b.numel()) +
                         " does not match row width " + std::to_string(d));
    }
    Tensor out = Tensor::zeros(x.shape());
    for (size_t r = 0; r < t; ++r) {
        for (size_t c = 0; c < d; ++c) out.data()[r * d + c] = x.data()[r * d + c] + b.data()[c];
    }
    if (should_record({&x, &b})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, b, out, t, d]() {
            if (!out.has_grad()) return;
            const auto& g = out.grad();
            if (x.requires_grad()) x.accumulate_grad(g);
            if (b.requires_grad()) {
                std::vector<double> db(d, 0.0);
                for (size_t r = 0; r < t; ++r) {
                    for (size_t c = 0; c < d; ++c) db[c] += g[r * d + c];
                }
                b.accumulate_grad(db);
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.shape());
    for (size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * c;
    if (should_record({&x})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, out, c]() {
            if (!out.has_grad()) return;
            std::vector<double> dx(out.grad());
            for (double& v : dx) v *= c;
            x.accumulate_grad(dx);
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    for (size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
    if (should_record({&x})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, out]() {
            if (!out.has_grad()) return;
            std::vector<double> dx(x.numel(), 0.0);
            for (size_t i = 0; i < x.numel(); ++i) {
                dx[i] = x.data()[i] > 0.0 ? out.grad()[i] : 0.0;
            }
            x.accumulate_grad(dx);
        });
    }
    return out;
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s);
    if (should_record({&x})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, out]() {
            if (!out.has_grad()) return;
            std::vector<double> dx(x.numel(), out.grad()[0]);
            x.accumulate_grad(dx);
        });
    }
    return out;
}

// ---- softmax -------------------------------------------------------------------

Tensor softmax_rows(const Tensor& x, const AttnMask* mask) {
    require_2d(x, "softmax_rows");
    const size_t m = x.rows(), n = x.cols();
    if (mask && (mask->rows != m || mask->cols != n)) {
        throw ShapeError("softmax_rows: mask shape [" + std::to_string(mask->rows) + "," +
                         std::to_string(mask->cols) + "] does not match input " +
                         shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros(x.shape());
    for (size_t r = 0; r < m; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < n; ++c) {
            if (mask && !mask->at(r, c)) continue;
            mx = std::max(mx, x.at(r, c));
        }
        if (!std::isfinite(mx)) {
            throw ShapeError("softmax_rows: row " + std::to_string(r) +
                             " is fully masked (degenerate row)");
        }
        double z = 0.0;
        for (size_t c = 0; c < n; ++c) {
            if (mask && !mask->at(r, c)) continue;
            const double e = std::exp(x.at(r, c) - mx);
            out.at(r, c) = e;
            z += e;
        }
        for (size_t c = 0; c < n; ++c) {
            if (mask && !mask->at(r, c)) {
                out.at(r, c) = 0.0;  // exactly zero at masked positions
            } else {
                out.at(r, c) /= z;
            }
        }
    }
    if (should_record({&x})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, out, m, n]() {
            if (!out.has_grad()) return;
            const auto& dy = out.grad();
            const auto& y = out.data();
            std::vector<double> dx(m * n, 0.0);
            for (size_t r = 0; r < m; ++r) {
                double dot = 0.0;
                for (size_t c = 0; c < n; ++c) dot += dy[r * n + c] * y[r * n + c];
                for (size_t c = 0; c < n; ++c) {
                    dx[r * n + c] = y[r * n + c] * (dy[r * n + c] - dot);
                }
            }
            x.accumulate_grad(dx);  // masked entries have y == 0, hence dx == 0
        });
    }
    return out;
}

// ---- layer norm ------------------------------------------------------------------

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const size_t d = gain.numel();
    if (d == 0) throw ShapeError("layer_norm: zero feature dimension");
    if (bias.numel() != d) {
        throw ShapeError("layer_norm: gain size " + std::to_string(d) +
                         " does not match bias size " + std::to_string(bias.numel()));
    }
    if (x.numel() % d != 0) {
        throw ShapeError("layer_norm: input " + shape_str(x.shape()) +
                         " is not divisible into rows of width " + std::to_string(d));
    }
    if (eps <= 0.0) throw ConfigError("layer_norm: eps must be positive");
    const size_t t = x.numel() / d;
    Tensor out = Tensor::zeros(x.shape());
    std::vector<double> mean(t), inv_std(t);
    for (size_t r = 0; r < t; ++r) {
        const double* px = &x.data()[r * d];
        double mu = 0.0;
        for (size_t c = 0; c < d; ++c) mu += px[c];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (size_t c = 0; c < d; ++c) var += (px[c] - mu) * (px[c] - mu);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        mean[r] = mu;
        inv_std[r] = inv;
        for (size_t c = 0; c < d; ++c) {
            out.data()[r * d + c] = (px[c] - mu) * inv * gain.data()[c] + bias.data()[c];
        }
    }
    if (should_record({&x, &gain, &bias})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, gain, bias, out, t, d, mean, inv_std]() {
            if (!out.has_grad()) return;
            const auto& dy = out.grad();
            std::vector<double> dx, dg, db;
            if (x.requires_grad()) dx.assign(t * d, 0.0);
            if (gain.requires_grad()) dg.assign(d, 0.0);
            if (bias.requires_grad()) db.assign(d, 0.0);
            for (size_t r = 0; r < t; ++r) {
                const double* px = &x.data()[r * d];
                const double inv = inv_std[r];
                const double mu = mean[r];
                // dxhat, plus the two row-reductions the chain rule needs
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (size_t c = 0; c < d; ++c) {
                    const double xhat = (px[c] - mu) * inv;
                    const double dyv = dy[r * d + c];
                    if (!db.empty()) db[c] += dyv;
                    if (!dg.empty()) dg[c] += dyv * xhat;
                    const double dxhat = dyv * gain.data()[c];
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xhat;
                }
                if (!dx.empty()) {
                    const double dn = static_cast<double>(d);
                    for (size_t c = 0; c < d; ++c) {
                        const double xhat = (px[c] - mu) * inv;
                        const double dxhat = dy[r * d + c] * gain.data()[c];
                        dx[r * d + c] =
                            inv * (dxhat - sum_dxhat / dn - xhat * sum_dxhat_xhat / dn);
                    }
                }
            }
            if (!dx.empty()) x.accumulate_grad(dx);
            if (!dg.empty()) gain.accumulate_grad(dg);
            if (!db.empty()) bias.accumulate_grad(db);
        });
    }
    return out;
}

// ---- cross entropy -----------------------------------------------------------------

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                     int ignore_index) {
    require_2d(logits, "cross_entropy");
    const size_t t = logits.rows(), v = logits.cols();
    if (targets.size() != t) {
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(t) + " logit rows");
    }
    size_t counted = 0;
    double total = 0.0;
    std::vector<double> lse(t, 0.0);
    for (size_t r = 0; r < t; ++r) {
        if (targets[r] == ignore_index) continue;
        if (targets[r] < 0 || static_cast<size_t>(targets[r]) >= v) {
            throw IndexError("cross_entropy: target " + std::to_string(targets[r]) +
                             " out of range for vocabulary " + std::to_string(v));
        }
        const double* row = &logits.data()[r * v];
        double mx = row[0];
        for (size_t c = 1; c < v; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (size_t c = 0; c < v; ++c) z += std::exp(row[c] - mx);
        lse[r] = mx + std::log(z);
        total += lse[r] - row[targets[r]];
        ++counted;
    }
    if (counted == 0) throw DataError("cross_entropy: every target is ignored");
    Tensor out = Tensor::scalar(total / static_cast<double>(counted));
    if (should_record({&logits})) {
        out.set_requires_grad(true);
        Tape::current()->record([logits, out, targets, ignore_index, t, v, lse,
                                 counted]() {
            if (!out.has_grad()) return;
            const double gscale = out.grad()[0] / static_cast<double>(counted);
            std::vector<double> dl(t * v, 0.0);
            for (size_t r = 0; r < t; ++r) {
                if (targets[r] == ignore_index) continue;
                const double* row = &logits.data()[r * v];
                for (size_t c = 0; c < v; ++c) {
                    dl[r * v + c] = std::exp(row[c] - lse[r]) * gscale;
                }
                dl[r * v + targets[r]] -= gscale;
            }
            logits.accumulate_grad(dl);
        });
    }
    return out;
}

// ---- gather / slice -----------------------------------------------------------------

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
    require_2d(table, "embedding_rows");
    const size_t v = table.rows(), d = table.cols();
    if (ids.empty()) throw ShapeError("embedding_rows: empty id list");
    Tensor out = Tensor::zeros({ids.size(), d});
    for (size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || static_cast<size_t>(ids[r]) >= v) {
            throw IndexError("embedding_rows: id " + std::to_string(ids[r]) +
                             " out of range for table with " + std::to_string(v) + " rows");
        }
        const double* src = &table.data()[static_cast<size_t>(ids[r]) * d];
        std::copy(src, src + d, &out.data()[r * d]);
    }
    if (should_record({&table})) {
        out.set_requires_grad(true);
        Tape::current()->record([table, out, ids, d]() {
            if (!out.has_grad()) return;
            std::vector<double> dt(table.numel(), 0.0);
            for (size_t r = 0; r < ids.size(); ++r) {
                const double* g = &out.grad()[r * d];
                double* dst = &dt[static_cast<size_t>(ids[r]) * d];
                for (size_t c = 0; c < d; ++c) dst[c] += g[c];
            }
            table.accumulate_grad(dt);
        });
    }
    return out;
}

Tensor col_slice(const Tensor& x, size_t c0, size_t width) {
    require_2d(x, "col_slice");
    const size_t t = x.rows(), d = x.cols();
    if (c0 + width > d) {
        throw ShapeError("col_slice: columns [" + std::to_string(c0) + "," +
                         std::to_string(c0 + width) + ") out of range for " +
                         shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros({t, width});
    for (size_t r = 0; r < t; ++r) {
        const double* src = &x.data()[r * d + c0];
        std::copy(src, src + width, &out.data()[r * width]);
    }
    if (should_record({&x})) {
        out.set_requires_grad(true);
        Tape::current()->record([x, out, c0, width, t, d]() {
            if (!out.has_grad()) return;
            std::vector<double> dx(t * d, 0.0);
            for (size_t r = 0; r < t; ++r) {
                for (size_t c = 0; c < width; ++c) {
                    dx[r * d + c0 + c] = out.grad()[r * width + c];
                }
            }
            x.accumulate_grad(dx);
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
    const size_t t = parts[0].rows();
    size_t total = 0;
    for (const Tensor& p : parts) {
        require_2d(p, "concat_cols");
        if (p.rows() != t) {
            throw ShapeError("concat_cols: row count mismatch, " + shape_str(p.shape()));
        }
        total += p.cols();
    }
    Tensor out = Tensor::zeros({t, total});
    size_t off = 0;
    for (const Tensor& p : parts) {
        const size_t w = p.cols();
        for (size_t r = 0; r < t; ++r) {
            std::copy(&p.data()[r * w], &p.data()[r * w] + w, &out.data()[r * total + off]);
        }
        off += w;
    }
    bool any_grad = false;
    for (const Tensor& p : parts) any_grad = any_grad || p.requires_grad();
    if (Tape::current() && any_grad) {
        out.set_requires_grad(true);
        Tape::current()->record([parts, out, t, total]() {
            if (!out.has_grad()) return;
            size_t off = 0;
            for (const Tensor& p : parts) {
                const size_t w = p.cols();
                if (p.requires_grad()) {
                    std::vector<double> dp(t * w, 0.0);
                    for (size_t r = 0; r < t; ++r) {
                        for (size_t c = 0; c < w; ++c) {
                            dp[r * w + c] = out.grad()[r * total + off + c];
                        }
                    }
                    p.accumulate_grad(dp);
                }
                off += w;
            }
        });
    }
    return out;
}

}  // namespace pfrost
