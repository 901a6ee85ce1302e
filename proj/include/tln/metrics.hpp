#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tln/error.hpp"
#include "tln/tensor.hpp"

namespace tln {

struct MetricResult {
    std::string name;
    real value = 0;
    std::size_t n = 0;
};

inline real mse(std::span<const real> y, std::span<const real> yhat) {
    if (y.size() != yhat.size()) {
        throw shape_error("mse: length mismatch, " + std::to_string(y.size()) + " vs " +
                          std::to_string(yhat.size()));
    }
    if (y.empty()) throw shape_error("mse: empty input");
    real acc = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const real d = y[i] - yhat[i];
        acc += d * d;
    }
    return acc / real(y.size());
}

/// Population variance around the mean.
inline real variance(std::span<const real> y) {
    if (y.empty()) throw shape_error("variance: empty input");
    real mean = 0;
    for (real v : y) mean += v;
    mean /= real(y.size());
    real acc = 0;
    for (real v : y) acc += (v - mean) * (v - mean);
    return acc / real(y.size());
}

inline real r2_score(std::span<const real> y, std::span<const real> yhat) {
    if (y.size() != yhat.size()) {
        throw shape_error("r2_score: length mismatch, " + std::to_string(y.size()) + " vs " +
                          std::to_string(yhat.size()));
    }
    if (y.size() < 2) throw shape_error("r2_score: need at least 2 observations");
    const real var = variance(y);
    if (var == real(0)) throw value_error("r2_score: constant targets have no variance");
    real ss_res = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const real d = y[i] - yhat[i];
        ss_res += d * d;
    }
    return real(1) - ss_res / (var * real(y.size()));
}

namespace detail {

template <typename Fn>
std::vector<real> per_horizon(std::span<const real> y, std::span<const real> yhat,
                              std::size_t horizon, Fn metric) {
    if (horizon < 1) throw shape_error("per_horizon: horizon must be >= 1");
    if (y.size() != yhat.size()) {
        throw shape_error("per_horizon: length mismatch, " + std::to_string(y.size()) + " vs " +
                          std::to_string(yhat.size()));
    }
    if (y.empty() || y.size() % horizon != 0) {
        throw shape_error("per_horizon: length " + std::to_string(y.size()) +
                          " is not a positive multiple of horizon " + std::to_string(horizon));
    }
    const std::size_t n = y.size() / horizon;
    std::vector<real> out(horizon);
    std::vector<real> ys(n), ps(n);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            ys[i] = y[i * horizon + h];
            ps[i] = yhat[i * horizon + h];
        }
        out[h] = metric(std::span<const real>(ys), std::span<const real>(ps));
    }
    return out;
}

} // namespace detail

/// Per-step metrics over sample-major flattened outputs (sample 0 steps
/// 0..H-1, then sample 1, ...): entry h scores only the h-th step ahead.
inline std::vector<real> per_horizon_mse(std::span<const real> y, std::span<const real> yhat,
                                         std::size_t horizon) {
    return detail::per_horizon(y, yhat, horizon,
                               [](std::span<const real> a, std::span<const real> b) {
                                   return mse(a, b);
                               });
}

inline std::vector<real> per_horizon_r2(std::span<const real> y, std::span<const real> yhat,
                                        std::size_t horizon) {
    return detail::per_horizon(y, yhat, horizon,
                               [](std::span<const real> a, std::span<const real> b) {
                                   return r2_score(a, b);
                               });
}

} // namespace tln
