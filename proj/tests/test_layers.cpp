#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "tln/layers.hpp"

using namespace tln;
using testutil::inner;
using testutil::random_conv;
using testutil::random_dense;
using testutil::random_tensor;
using testutil::random_vector;

namespace {

SequenceTensor bias_rows(std::size_t rows, const std::vector<real>& v) {
    std::vector<real> d(rows * v.size());
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < v.size(); ++j) d[i * v.size() + j] = v[j];
    return SequenceTensor(rows, v.size(), std::move(d));
}

SequenceTensor bias_cols(const std::vector<real>& v, std::size_t cols) {
    std::vector<real> d(v.size() * cols);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) d[i * cols + j] = v[i];
    return SequenceTensor(v.size(), cols, std::move(d));
}

// Stage-by-stage composition out of tensor primitives, used as an
// independent oracle for the fused forward loops.
SequenceTensor seqdense_oracle(const SequentialDenseParams& p, const SequenceTensor& x) {
    const auto t1 = hadamard_broadcast(x, p.base_kernel, Axis::rows);
    const auto q = add(matmul(t1, transpose(p.feature_weights)), bias_rows(x.rows(), p.feature_bias));
    const auto t2 = hadamard_broadcast(q, p.feature_kernel, Axis::cols);
    const auto pre = add(matmul(p.time_weights, t2), bias_cols(p.time_bias, t2.cols()));
    return hadamard_broadcast(pre, p.time_kernel, Axis::rows);
}

SequentialDenseParams zero_bias(SequentialDenseParams p) {
    std::fill(p.feature_bias.begin(), p.feature_bias.end(), real(0));
    std::fill(p.time_bias.begin(), p.time_bias.end(), real(0));
    return p;
}

TlnModel wrap(SequentialDenseParams dense, std::optional<DepthwiseConvParams> conv = {}) {
    TlnModel m;
    m.layers.push_back(TlnLayer{std::move(dense), std::move(conv)});
    return m;
}

} // namespace

TEST_CASE("seqdense identity configuration") {
    const SequentialDenseParams p{
        {1, 1}, SequenceTensor::from_rows({{1}}), {0}, {1},
        SequenceTensor::identity(2), {0, 0}, {1, 1},
    };
    const auto x = SequenceTensor::from_rows({{3}, {4}});
    CHECK(seqdense_forward(p, x) == x);
}

TEST_CASE("seqdense bias-only path") {
    const SequentialDenseParams p{
        {1, 1}, SequenceTensor::zeros(1, 1), {0}, {1},
        SequenceTensor::zeros(2, 2), {5, 5}, {1, 1},
    };
    const auto x = SequenceTensor::from_rows({{-7}, {2}});
    CHECK(seqdense_forward(p, x) == SequenceTensor::from_rows({{5}, {5}}));
}

TEST_CASE("seqdense hand-composed case") {
    const SequentialDenseParams p{
        {2, 3}, SequenceTensor::from_rows({{1}}), {0}, {1},
        SequenceTensor::from_rows({{1, 1}, {0, 1}}), {0, 0}, {1, 2},
    };
    const auto x = SequenceTensor::from_rows({{1}, {1}});
    const auto y = seqdense_forward(p, x);
    CHECK(y == SequenceTensor::from_rows({{5}, {6}}));
    CHECK(y == seqdense_oracle(p, x));
}

TEST_CASE("seqdense matches stage composition oracle on random instances") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 30; ++i) {
        const auto p = random_dense(rng, 4, 3, 5, 2);
        const auto x = random_tensor(rng, 4, 3);
        const auto got = seqdense_forward(p, x);
        const auto want = seqdense_oracle(p, x);
        CHECK(max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("seqdense shape mismatch") {
    std::mt19937_64 rng(3);
    const auto p = random_dense(rng, 4, 3, 5, 2);
    CHECK_THROWS_AS(seqdense_forward(p, SequenceTensor::zeros(3, 3)), shape_error);
    CHECK_THROWS_AS(seqdense_forward(p, SequenceTensor::zeros(4, 2)), shape_error);
}

TEST_CASE("seqdense backward zero cotangent") {
    std::mt19937_64 rng(5);
    const auto p = random_dense(rng, 3, 2, 2, 1);
    const auto x = random_tensor(rng, 3, 2);
    const auto [g, gin] = seqdense_backward(p, x, SequenceTensor::zeros(2, 1));
    CHECK(max_abs(gin) == 0.0);
    CHECK(max_abs(g.feature_weights) == 0.0);
    CHECK(max_abs(g.time_weights) == 0.0);
    for (real v : g.base_kernel) CHECK(v == 0.0);
    for (real v : g.time_kernel) CHECK(v == 0.0);
}

TEST_CASE("seqdense backward identity adjoint") {
    const SequentialDenseParams p{
        {1, 1}, SequenceTensor::from_rows({{1}}), {0}, {1},
        SequenceTensor::identity(2), {0, 0}, {1, 1},
    };
    std::mt19937_64 rng(9);
    const auto x = random_tensor(rng, 2, 1);
    const auto g = random_tensor(rng, 2, 1);
    const auto [grads, gin] = seqdense_backward(p, x, g);
    CHECK(gin == g);
}

TEST_CASE("seqdense backward matches finite differences") {
    std::mt19937_64 rng(33);
    const auto p = random_dense(rng, 3, 2, 2, 1);
    const auto x = random_tensor(rng, 3, 2);
    const auto g = random_tensor(rng, 2, 1);
    CHECK(testutil::max_grad_error(wrap(p), x, g) < 1e-5);
}

TEST_CASE("conv unit tap is identity") {
    const DepthwiseConvParams p{SequenceTensor::from_rows({{1}}), {0}, 1};
    std::mt19937_64 rng(2);
    const auto x = random_tensor(rng, 6, 1);
    CHECK(conv1d_forward(p, x) == x);
}

TEST_CASE("conv two-tap summation") {
    const DepthwiseConvParams p{SequenceTensor::from_rows({{1}, {1}}), {0}, 1};
    const auto x = SequenceTensor::from_rows({{1}, {2}, {3}});
    CHECK(conv1d_forward(p, x) == SequenceTensor::from_rows({{1}, {3}, {5}}));
}

TEST_CASE("conv matches direct summation oracle") {
    std::mt19937_64 rng(14);
    for (std::size_t d : {std::size_t{1}, std::size_t{2}}) {
        const auto p = random_conv(rng, 3, 2, d);
        const auto x = random_tensor(rng, 8, 2);
        const auto got = conv1d_forward(p, x);
        for (std::size_t t = 0; t < 8; ++t) {
            for (std::size_t q = 0; q < 2; ++q) {
                real want = p.bias[q];
                for (std::size_t r = 0; r < 3; ++r) {
                    const std::ptrdiff_t src = std::ptrdiff_t(t) - std::ptrdiff_t(r * d);
                    if (src >= 0) want += p.kernel(r, q) * x(std::size_t(src), q);
                }
                CHECK(got(t, q) == Catch::Approx(want).margin(1e-14));
            }
        }
    }
}

TEST_CASE("conv zero kernel gives constant bias output") {
    const DepthwiseConvParams p{SequenceTensor::zeros(2, 1), {4.5}, 1};
    std::mt19937_64 rng(6);
    const auto x = random_tensor(rng, 5, 1);
    CHECK(conv1d_forward(p, x) == SequenceTensor::constant(5, 1, 4.5));
}

TEST_CASE("conv rejects bad shapes and oversized receptive field") {
    std::mt19937_64 rng(8);
    const auto p = random_conv(rng, 3, 2, 2);
    CHECK_THROWS_AS(conv1d_forward(p, SequenceTensor::zeros(8, 3)), shape_error);
    CHECK_THROWS_AS(conv1d_forward(p, SequenceTensor::zeros(4, 2)), config_error);
}

TEST_CASE("conv causality: future perturbation leaves prefix bit-identical") {
    std::mt19937_64 rng(17);
    const auto p = random_conv(rng, 3, 2, 2);
    const auto x = random_tensor(rng, 10, 2);
    const auto base = conv1d_forward(p, x);
    for (std::size_t t = 0; t + 1 < 10; ++t) {
        std::vector<real> d(x.data().begin(), x.data().end());
        d[(t + 1) * 2] += 7.0;
        d[(t + 1) * 2 + 1] -= 3.0;
        const auto perturbed = conv1d_forward(p, SequenceTensor(10, 2, std::move(d)));
        for (std::size_t u = 0; u <= t; ++u)
            for (std::size_t q = 0; q < 2; ++q) CHECK(perturbed(u, q) == base(u, q));
    }
}

TEST_CASE("conv backward zero cotangent") {
    std::mt19937_64 rng(25);
    const auto p = random_conv(rng, 3, 2, 1);
    const auto x = random_tensor(rng, 6, 2);
    const auto [g, gin] = conv1d_backward(p, x, SequenceTensor::zeros(6, 2));
    CHECK(max_abs(g.kernel) == 0.0);
    CHECK(max_abs(gin) == 0.0);
    for (real v : g.bias) CHECK(v == 0.0);
}

TEST_CASE("conv backward unit tap identity adjoint") {
    const DepthwiseConvParams p{SequenceTensor::from_rows({{1}}), {0}, 1};
    std::mt19937_64 rng(26);
    const auto x = random_tensor(rng, 5, 1);
    const auto g = random_tensor(rng, 5, 1);
    const auto [grads, gin] = conv1d_backward(p, x, g);
    CHECK(gin == g);
}

TEST_CASE("conv backward matches finite differences") {
    std::mt19937_64 rng(41);
    SequentialDenseParams identity{
        {1, 1, 1, 1, 1}, SequenceTensor::from_rows({{1, 0}, {0, 1}}), {0, 0}, {1, 1},
        SequenceTensor::identity(5), {0, 0, 0, 0, 0}, {1, 1, 1, 1, 1},
    };
    const auto conv = random_conv(rng, 3, 2, 2);
    const auto x = random_tensor(rng, 5, 2);
    const auto g = random_tensor(rng, 5, 2);
    CHECK(testutil::max_grad_error(wrap(identity, conv), x, g) < 1e-5);
}

TEST_CASE("homogeneity with zero biases") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 10; ++i) {
        const auto p = zero_bias(random_dense(rng, 4, 2, 3, 2));
        const auto x = random_tensor(rng, 4, 2);
        const real a = 3.7;
        const auto lhs = seqdense_forward(p, scale(x, a));
        const auto rhs = scale(seqdense_forward(p, x), a);
        const real denom = std::max(max_abs(rhs), real(1));
        CHECK(max_abs_diff(lhs, rhs) / denom < 1e-10);

        auto conv = random_conv(rng, 2, 2, 1);
        std::fill(conv.bias.begin(), conv.bias.end(), real(0));
        const auto cl = conv1d_forward(conv, scale(x, a));
        const auto cr = scale(conv1d_forward(conv, x), a);
        const real cdenom = std::max(max_abs(cr), real(1));
        CHECK(max_abs_diff(cl, cr) / cdenom < 1e-10);
    }
}

TEST_CASE("additivity up to bias") {
    std::mt19937_64 rng(52);
    for (int i = 0; i < 10; ++i) {
        const auto p = random_dense(rng, 4, 2, 3, 2);
        const auto x = random_tensor(rng, 4, 2);
        const auto y = random_tensor(rng, 4, 2);
        const auto lhs = seqdense_forward(p, add(x, y));
        const auto rhs = sub(add(seqdense_forward(p, x), seqdense_forward(p, y)),
                             seqdense_forward(p, SequenceTensor::zeros(4, 2)));
        const real denom = std::max(max_abs(rhs), real(1));
        CHECK(max_abs_diff(lhs, rhs) / denom < 1e-10);
    }
}

TEST_CASE("adjoint identity for the linear part") {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 10; ++i) {
        const auto p = zero_bias(random_dense(rng, 4, 3, 2, 2));
        const auto x = random_tensor(rng, 4, 3);
        const auto g = random_tensor(rng, 2, 2);
        const auto [grads, gin] = seqdense_backward(p, x, g);
        const real lhs = inner(g, seqdense_forward(p, x));
        const real rhs = inner(gin, x);
        CHECK(std::abs(lhs - rhs) / std::max(std::abs(lhs), real(1)) < 1e-10);

        auto conv = random_conv(rng, 3, 3, 1);
        std::fill(conv.bias.begin(), conv.bias.end(), real(0));
        const auto g2 = random_tensor(rng, 4, 3);
        const auto [cg, cgin] = conv1d_backward(conv, x, g2);
        const real clhs = inner(g2, conv1d_forward(conv, x));
        const real crhs = inner(cgin, x);
        CHECK(std::abs(clhs - crhs) / std::max(std::abs(clhs), real(1)) < 1e-10);
    }
}
