#pragma once

#include <cstdint>

#include "pfrost/tensor.hpp"

namespace pfrost {

// Uniform samples on the open interval (-a, a) with a = sqrt(6 / (fan_in +
// fan_out)). shape is [fan_out, fan_in]; both dimensions must be positive.
Tensor glorot_init(size_t fan_out, size_t fan_in, uint64_t seed);

double glorot_bound(size_t fan_out, size_t fan_in);

// Rectangular identity: entry[i][j] = 1 if i == j else 0. Rows or columns
// beyond the overlapping square are all zero.
Tensor diagonal_init(size_t rows, size_t cols);

}  // namespace pfrost
