#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "tln/model.hpp"
#include "tln/tensor.hpp"

namespace testutil {

using tln::SequenceTensor;
using tln::real;

inline SequenceTensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                    real lo = -1.0, real hi = 1.0) {
    std::uniform_real_distribution<real> dist(lo, hi);
    std::vector<real> d(rows * cols);
    for (auto& v : d) v = dist(rng);
    return SequenceTensor(rows, cols, std::move(d));
}

inline std::vector<real> random_vector(std::mt19937_64& rng, std::size_t n, real lo = -1.0,
                                       real hi = 1.0) {
    std::uniform_real_distribution<real> dist(lo, hi);
    std::vector<real> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline tln::SequentialDenseParams random_dense(std::mt19937_64& rng, std::size_t s_in,
                                               std::size_t f_in, std::size_t s_out,
                                               std::size_t f_out) {
    return tln::SequentialDenseParams{
        random_vector(rng, s_in),
        random_tensor(rng, f_out, f_in),
        random_vector(rng, f_out),
        random_vector(rng, f_out),
        random_tensor(rng, s_out, s_in),
        random_vector(rng, s_out),
        random_vector(rng, s_out),
    };
}

inline tln::DepthwiseConvParams random_conv(std::mt19937_64& rng, std::size_t k, std::size_t q,
                                            std::size_t d) {
    return tln::DepthwiseConvParams{random_tensor(rng, k, q), random_vector(rng, q), d};
}

inline real inner(const SequenceTensor& a, const SequenceTensor& b) {
    real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

// Central-difference check of backward() against the scalar loss <g, forward(x)>.
// Returns the worst relative error over all parameters, with the gradient-check
// denominator max(|analytic| + |numeric|, 1).
inline real max_grad_error(const tln::TlnModel& m, const SequenceTensor& x,
                           const SequenceTensor& g, real step = 1e-6) {
    const auto analytic = tln::pack_grads(tln::backward(m, x, g));
    auto flat = tln::pack_params(m);
    tln::TlnModel probe = m;
    real worst = 0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const real saved = flat[i];
        flat[i] = saved + step;
        tln::unpack_params(probe, flat);
        const real up = inner(g, tln::forward(probe, x));
        flat[i] = saved - step;
        tln::unpack_params(probe, flat);
        const real down = inner(g, tln::forward(probe, x));
        flat[i] = saved;
        const real numeric = (up - down) / (2 * step);
        const real denom = std::max(std::abs(analytic[i]) + std::abs(numeric), real(1));
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    tln::unpack_params(probe, flat);
    return worst;
}

} // namespace testutil
