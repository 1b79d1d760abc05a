#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pfrost/error.hpp"
#include "pfrost/rng.hpp"
#include "pfrost/tensor.hpp"

using namespace pfrost;

namespace {

Tensor random_tensor(std::vector<size_t> shape, uint64_t seed, bool requires_grad = true,
                     double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace

TEST_CASE("tensor invariants") {
    CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({3, 0}), ShapeError);
    Tensor t = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.at(1, 2) == 6.0);
    CHECK_FALSE(t.has_grad());
}

TEST_CASE("matmul identity and dot product") {
    const Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    const Tensor b = Tensor::from_data({2, 2}, {3, 4, 5, 6});
    const Tensor c = matmul(eye, b);
    for (size_t i = 0; i < 4; ++i) CHECK(c.data()[i] == b.data()[i]);

    const Tensor row = Tensor::from_data({1, 2}, {1, 2});
    const Tensor col = Tensor::from_data({2, 1}, {3, 4});
    CHECK(matmul(row, col).item() == 11.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
    const Tensor a = Tensor::zeros({2, 3});
    const Tensor b = Tensor::zeros({2, 3});
    try {
        matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
    }
}

TEST_CASE("matmul gradients vs central finite differences") {
    Tensor a = random_tensor({3, 4}, 11);
    Tensor b = random_tensor({4, 2}, 12);
    auto loss = [&]() { return sum(relu(matmul(a, b))); };
    CHECK(oracles::finite_diff_max_rel_err(loss, {a, b}) < 1e-6);
}

TEST_CASE("matmul_nt gradients vs central finite differences") {
    Tensor a = random_tensor({3, 4}, 21);
    Tensor b = random_tensor({5, 4}, 22);
    auto loss = [&]() { return sum(relu(matmul_nt(a, b))); };
    CHECK(oracles::finite_diff_max_rel_err(loss, {a, b}) < 1e-6);
}

TEST_CASE("softmax uniform row") {
    const Tensor x = Tensor::from_data({1, 3}, {0, 0, 0});
    const Tensor y = softmax_rows(x);
    for (size_t c = 0; c < 3; ++c) CHECK(y.at(0, c) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("softmax single survivor under mask") {
    const Tensor x = Tensor::from_data({1, 2}, {5, 5});
    AttnMask mask = AttnMask::all(1, 2);
    mask.keep[1] = 0;
    const Tensor y = softmax_rows(x, &mask);
    CHECK(y.at(0, 0) == 1.0);
    CHECK(y.at(0, 1) == 0.0);  // exactly zero
}

TEST_CASE("softmax matches direct evaluation") {
    const Tensor x = Tensor::from_data({1, 3}, {1, 2, 3});
    const Tensor y = softmax_rows(x);
    const auto expect = oracles::softmax_row({1, 2, 3});
    for (size_t c = 0; c < 3; ++c) CHECK(std::abs(y.at(0, c) - expect[c]) < 1e-12);
}

TEST_CASE("softmax rows sum to one and masked entries are zero") {
    Rng rng(33);
    Tensor x = random_tensor({6, 9}, 34, false, -4.0, 4.0);
    AttnMask mask = AttnMask::all(6, 9);
    for (size_t i = 0; i < mask.keep.size(); ++i) {
        if (rng.unit() < 0.3) mask.keep[i] = 0;
    }
    for (size_t r = 0; r < 6; ++r) mask.keep[r * 9 + (r % 9)] = 1;  // keep rows solvable
    const Tensor y = softmax_rows(x, &mask);
    for (size_t r = 0; r < 6; ++r) {
        double s = 0.0;
        for (size_t c = 0; c < 9; ++c) {
            if (!mask.at(r, c)) CHECK(y.at(r, c) == 0.0);
            s += y.at(r, c);
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax fully masked row is a degenerate-row error") {
    const Tensor x = Tensor::zeros({2, 3});
    AttnMask mask = AttnMask::all(2, 3);
    mask.keep[3] = mask.keep[4] = mask.keep[5] = 0;
    CHECK_THROWS_AS(softmax_rows(x, &mask), ShapeError);
}

TEST_CASE("softmax gradient vs finite differences") {
    Tensor x = random_tensor({4, 5}, 35);
    AttnMask mask = AttnMask::causal(4);
    AttnMask wide = AttnMask::all(4, 5);
    for (size_t r = 0; r < 4; ++r) {
        for (size_t c = 0; c < 5; ++c) wide.keep[r * 5 + c] = c < 4 ? mask.keep[r * 4 + c] : 1;
    }
    // slice a column block so the loss is not the constant row sum
    auto loss = [&]() { return sum(col_slice(softmax_rows(x, &wide), 0, 2)); };
    CHECK(oracles::finite_diff_max_rel_err(loss, {x}) < 1e-4);
}

TEST_CASE("layer_norm constant row becomes zeros") {
    const Tensor x = Tensor::full({1, 8}, 3.25);
    const Tensor gain = Tensor::full({8}, 1.0);
    const Tensor bias = Tensor::zeros({8});
    const Tensor y = layer_norm(x, gain, bias);
    for (double v : y.data()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("layer_norm zero gain gives constant bias") {
    const Tensor x = random_tensor({2, 8}, 41, false);
    const Tensor gain = Tensor::zeros({8});
    const Tensor bias = Tensor::full({8}, -2.5);
    const Tensor y = layer_norm(x, gain, bias);
    for (double v : y.data()) CHECK(v == -2.5);
}

TEST_CASE("layer_norm rejects zero feature dimension") {
    CHECK_THROWS_AS(layer_norm(Tensor::zeros({2, 3}), Tensor::zeros({3, 1}),
                               Tensor::zeros({0, 1})),
                    ShapeError);
}

TEST_CASE("layer_norm gradients vs finite differences") {
    Tensor x = random_tensor({2, 8}, 42);
    Tensor gain = random_tensor({8}, 43, true, 0.5, 1.5);
    Tensor bias = random_tensor({8}, 44);
    auto loss = [&]() { return sum(relu(layer_norm(x, gain, bias))); };
    CHECK(oracles::finite_diff_max_rel_err(loss, {x, gain, bias}) < 1e-5);
}

TEST_CASE("cross_entropy peaked logits give near-zero loss") {
    Tensor logits = Tensor::zeros({3, 5});
    const std::vector<int> targets{1, 3, 0};
    for (size_t r = 0; r < 3; ++r) logits.at(r, targets[r]) = 30.0;
    CHECK(cross_entropy(logits, targets).item() < 1e-9);
}

TEST_CASE("cross_entropy uniform logits equal log vocab") {
    const Tensor logits = Tensor::zeros({2, 4});
    CHECK(cross_entropy(logits, {0, 2}).item() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy matches brute-force softmax oracle") {
    Tensor logits = random_tensor({5, 7}, 51, true, -2.0, 2.0);
    const std::vector<int> targets{3, 0, 6, 2, 2};
    const auto expect = oracles::cross_entropy_oracle(logits.data(), 5, 7, targets);

    Tape tape;
    const Tensor loss = cross_entropy(logits, targets);
    CHECK(std::abs(loss.item() - expect.loss) < 1e-10);
    tape.backward(loss);
    for (size_t i = 0; i < logits.numel(); ++i) {
        CHECK(std::abs(logits.grad()[i] - expect.dlogits[i]) < 1e-10);
    }
}

TEST_CASE("cross_entropy out-of-range target is an index error") {
    const Tensor logits = Tensor::zeros({2, 4});
    CHECK_THROWS_AS(cross_entropy(logits, {0, 4}), IndexError);
}

TEST_CASE("cross_entropy respects ignore_index") {
    Tensor logits = Tensor::zeros({3, 4});
    logits.at(0, 1) = 30.0;
    logits.at(2, 2) = 30.0;
    // middle row would contribute log(4) but is ignored
    const double loss = cross_entropy(logits, {1, 0, 2}, /*ignore_index=*/0).item();
    CHECK(loss < 1e-9);
    CHECK_THROWS_AS(cross_entropy(logits, {0, 0, 0}, 0), DataError);
}

TEST_CASE("backward of sum fills ones") {
    Tape tape;
    Tensor x = Tensor::from_data({3}, {5, -1, 2}, true);
    tape.backward(sum(x));
    REQUIRE(x.has_grad());
    for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("frozen tensors never get gradient buffers") {
    Tape tape;
    Tensor a = random_tensor({2, 3}, 61, true);
    Tensor frozen = random_tensor({3, 2}, 62, false);
    const Tensor loss = sum(relu(matmul(a, frozen)));
    tape.backward(loss);
    CHECK(a.has_grad());
    CHECK_FALSE(frozen.has_grad());  // gradient flows through but is never materialized
}

TEST_CASE("backward requires a scalar") {
    Tape tape;
    Tensor x = random_tensor({2, 2}, 63, true);
    const Tensor y = relu(x);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
}

TEST_CASE("backward is deterministic bit for bit") {
    Tensor a = random_tensor({4, 4}, 71);
    Tensor b = random_tensor({4, 4}, 72);
    auto run = [&]() {
        a.drop_grad();
        b.drop_grad();
        Tape tape;
        const Tensor loss = sum(relu(matmul(a, b)));
        tape.backward(loss);
        return std::make_pair(a.grad(), b.grad());
    };
    const auto first = run();
    const auto second = run();
    CHECK(first.first == second.first);    // exact equality
    CHECK(first.second == second.second);
}

TEST_CASE("embedding_rows gathers and scatters") {
    Tensor table = random_tensor({5, 3}, 81);
    const std::vector<int> ids{4, 0, 4};
    Tape tape;
    const Tensor out = embedding_rows(table, ids);
    for (size_t c = 0; c < 3; ++c) {
        CHECK(out.at(0, c) == table.at(4, c));
        CHECK(out.at(1, c) == table.at(0, c));
    }
    tape.backward(sum(out));
    // row 4 used twice, row 0 once, others untouched
    CHECK(table.grad()[4 * 3] == 2.0);
    CHECK(table.grad()[0] == 1.0);
    CHECK(table.grad()[1 * 3] == 0.0);
    CHECK_THROWS_AS(embedding_rows(table, {5}), IndexError);
}

TEST_CASE("col_slice and concat_cols invert each other") {
    Tensor x = random_tensor({3, 6}, 91);
    auto loss = [&]() {
        const Tensor left = col_slice(x, 0, 2);
        const Tensor mid = col_slice(x, 2, 3);
        const Tensor right = col_slice(x, 5, 1);
        return sum(relu(concat_cols({left, mid, right})));
    };
    {
        const Tensor rebuilt = concat_cols({col_slice(x, 0, 2), col_slice(x, 2, 3),
                                            col_slice(x, 5, 1)});
        CHECK(rebuilt.data() == x.data());
    }
    CHECK(oracles::finite_diff_max_rel_err(loss, {x}) < 1e-6);
}

TEST_CASE("add_row and scale gradients") {
    Tensor x = random_tensor({4, 3}, 95);
    Tensor b = random_tensor({3}, 96);
    auto loss = [&]() { return sum(relu(scale(add_row(x, b), 1.7))); };
    CHECK(oracles::finite_diff_max_rel_err(loss, {x, b}) < 1e-6);
}
