#include "pfrost/init.hpp"

#include <cmath>

#include "pfrost/error.hpp"
#include "pfrost/rng.hpp"

namespace pfrost {

double glorot_bound(size_t fan_out, size_t fan_in) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor glorot_init(size_t fan_out, size_t fan_in, uint64_t seed) {
    if (fan_out == 0 || fan_in == 0) {
        throw ShapeError("glorot_init: dimensions must be positive, got [" +
                         std::to_string(fan_out) + "," + std::to_string(fan_in) + "]");
    }
    const double a = glorot_bound(fan_out, fan_in);
    Rng rng(seed);
    Tensor t = Tensor::zeros({fan_out, fan_in});
    for (double& v : t.data()) v = rng.uniform(-a, a);
    return t;
}

Tensor diagonal_init(size_t rows, size_t cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("diagonal_init: dimensions must be positive, got [" +
                         std::to_string(rows) + "," + std::to_string(cols) + "]");
    }
    Tensor t = Tensor::zeros({rows, cols});
    const size_t k = std::min(rows, cols);
    for (size_t i = 0; i < k; ++i) t.at(i, i) = 1.0;
    return t;
}

}  // namespace pfrost
