#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tln/tensor.hpp"

namespace tln {

namespace detail {

inline void check_finite(std::span<const real> v, const std::string& what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw value_error(what + ": non-finite entry at index " + std::to_string(i));
        }
    }
}

} // namespace detail

/// Parameters of the three-stage SequentialDense layer mapping
/// (S_in x F_in) -> (S_out x F_out):
///
///   stage 1: t1[s,f]   = base_kernel[s] * x[s,f]
///   stage 2: t2[s,f']  = feature_kernel[f'] * (sum_f feature_weights[f',f] * t1[s,f] + feature_bias[f'])
///   stage 3: y[s',f']  = time_kernel[s'] * (sum_s time_weights[s',s] * t2[s,f'] + time_bias[s'])
///
/// The feature transform is shared across positions, the time transform is
/// shared across features; the multiplicative kernels scale one axis each.
struct SequentialDenseParams {
    std::vector<real> base_kernel;    // length S_in
    SequenceTensor feature_weights;   // F_out x F_in
    std::vector<real> feature_bias;   // length F_out
    std::vector<real> feature_kernel; // length F_out
    SequenceTensor time_weights;      // S_out x S_in
    std::vector<real> time_bias;      // length S_out
    std::vector<real> time_kernel;    // length S_out

    std::size_t input_seq_len() const { return base_kernel.size(); }
    std::size_t input_features() const { return feature_weights.cols(); }
    std::size_t output_seq_len() const { return time_weights.rows(); }
    std::size_t output_features() const { return feature_weights.rows(); }

    void validate() const {
        const std::size_t s_in = input_seq_len();
        const std::size_t f_out = output_features();
        const std::size_t s_out = output_seq_len();
        if (s_in < 1) throw shape_error("SequentialDenseParams: empty base_kernel");
        if (time_weights.cols() != s_in) {
            throw shape_error("SequentialDenseParams: time_weights " + time_weights.shape_string() +
                              " inconsistent with base_kernel length " + std::to_string(s_in));
        }
        if (feature_bias.size() != f_out || feature_kernel.size() != f_out) {
            throw shape_error("SequentialDenseParams: feature bias/kernel length must be " +
                              std::to_string(f_out));
        }
        if (time_bias.size() != s_out || time_kernel.size() != s_out) {
            throw shape_error("SequentialDenseParams: time bias/kernel length must be " +
                              std::to_string(s_out));
        }
        detail::check_finite(base_kernel, "base_kernel");
        detail::check_finite(feature_bias, "feature_bias");
        detail::check_finite(feature_kernel, "feature_kernel");
        detail::check_finite(time_bias, "time_bias");
        detail::check_finite(time_kernel, "time_kernel");
    }
};

/// Gradients of a scalar loss w.r.t. every SequentialDense parameter.
struct SequentialDenseGrads {
    std::vector<real> base_kernel;
    SequenceTensor feature_weights;
    std::vector<real> feature_bias;
    std::vector<real> feature_kernel;
    SequenceTensor time_weights;
    std::vector<real> time_bias;
    std::vector<real> time_kernel;
};

/// Causal depthwise 1-D convolution: one filter column per feature channel,
/// tap r reaching r*dilation steps into the past (row 0 reads the current
/// position).
///
///   y[t,q] = bias[q] + sum_r kernel[r,q] * x[t - r*dilation, q]
///
/// with x at negative positions treated as zero (left zero-padding), so the
/// output length equals the input length and position t never reads past t.
struct DepthwiseConvParams {
    SequenceTensor kernel;   // kernel_size x channels
    std::vector<real> bias;  // length channels
    std::size_t dilation = 1;

    std::size_t kernel_size() const { return kernel.rows(); }
    std::size_t channels() const { return kernel.cols(); }
    std::size_t receptive_field() const { return (kernel.rows() - 1) * dilation + 1; }

    void validate() const {
        if (dilation < 1) throw config_error("DepthwiseConvParams: dilation must be >= 1");
        if (bias.size() != channels()) {
            throw shape_error("DepthwiseConvParams: bias length " + std::to_string(bias.size()) +
                              " does not match " + std::to_string(channels()) + " channels");
        }
        detail::check_finite(bias, "conv bias");
    }
};

struct DepthwiseConvGrads {
    SequenceTensor kernel;
    std::vector<real> bias;
};

inline SequenceTensor seqdense_forward(const SequentialDenseParams& p, const SequenceTensor& x) {
    if (x.rows() != p.input_seq_len() || x.cols() != p.input_features()) {
        throw shape_error("seqdense_forward: input " + x.shape_string() + " does not match " +
                          std::to_string(p.input_seq_len()) + "x" +
                          std::to_string(p.input_features()));
    }
    const std::size_t s_in = p.input_seq_len(), f_in = p.input_features();
    const std::size_t s_out = p.output_seq_len(), f_out = p.output_features();

    // base scaling + feature transform, position by position
    std::vector<real> t2(s_in * f_out);
    for (std::size_t s = 0; s < s_in; ++s) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            real acc = p.feature_bias[fo];
            for (std::size_t f = 0; f < f_in; ++f) {
                acc += p.feature_weights(fo, f) * p.base_kernel[s] * x(s, f);
            }
            t2[s * f_out + fo] = p.feature_kernel[fo] * acc;
        }
    }

    // time transform, feature by feature
    std::vector<real> y(s_out * f_out);
    for (std::size_t so = 0; so < s_out; ++so) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            real acc = p.time_bias[so];
            for (std::size_t s = 0; s < s_in; ++s) {
                acc += p.time_weights(so, s) * t2[s * f_out + fo];
            }
            y[so * f_out + fo] = p.time_kernel[so] * acc;
        }
    }
    return SequenceTensor(s_out, f_out, std::move(y));
}

/// Exact reverse-mode pass: all stages are affine, so every gradient is a
/// product of the fixed factors. Returns the parameter gradients and the
/// gradient w.r.t. the input (which does not depend on x).
inline std::pair<SequentialDenseGrads, SequenceTensor> seqdense_backward(
    const SequentialDenseParams& p, const SequenceTensor& x, const SequenceTensor& grad_out) {
    if (x.rows() != p.input_seq_len() || x.cols() != p.input_features()) {
        throw shape_error("seqdense_backward: input " + x.shape_string() + " does not match " +
                          std::to_string(p.input_seq_len()) + "x" +
                          std::to_string(p.input_features()));
    }
    if (grad_out.rows() != p.output_seq_len() || grad_out.cols() != p.output_features()) {
        throw shape_error("seqdense_backward: grad_out " + grad_out.shape_string() +
                          " does not match " + std::to_string(p.output_seq_len()) + "x" +
                          std::to_string(p.output_features()));
    }
    const std::size_t s_in = p.input_seq_len(), f_in = p.input_features();
    const std::size_t s_out = p.output_seq_len(), f_out = p.output_features();

    // recompute forward intermediates
    std::vector<real> t1(s_in * f_in);        // base_kernel . x
    for (std::size_t s = 0; s < s_in; ++s)
        for (std::size_t f = 0; f < f_in; ++f) t1[s * f_in + f] = p.base_kernel[s] * x(s, f);

    std::vector<real> q(s_in * f_out);        // pre-kernel feature transform
    std::vector<real> t2(s_in * f_out);
    for (std::size_t s = 0; s < s_in; ++s) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            real acc = p.feature_bias[fo];
            for (std::size_t f = 0; f < f_in; ++f) acc += p.feature_weights(fo, f) * t1[s * f_in + f];
            q[s * f_out + fo] = acc;
            t2[s * f_out + fo] = p.feature_kernel[fo] * acc;
        }
    }
    std::vector<real> pre_tau(s_out * f_out); // pre-kernel time transform
    for (std::size_t so = 0; so < s_out; ++so) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            real acc = p.time_bias[so];
            for (std::size_t s = 0; s < s_in; ++s) acc += p.time_weights(so, s) * t2[s * f_out + fo];
            pre_tau[so * f_out + fo] = acc;
        }
    }

    SequentialDenseGrads g{
        std::vector<real>(s_in, 0),
        SequenceTensor::zeros(f_out, f_in),
        std::vector<real>(f_out, 0),
        std::vector<real>(f_out, 0),
        SequenceTensor::zeros(s_out, s_in),
        std::vector<real>(s_out, 0),
        std::vector<real>(s_out, 0),
    };

    // stage 3 adjoint
    std::vector<real> g_pre(s_out * f_out);
    std::vector<real> g_wt(s_out * s_in, 0);
    std::vector<real> g_t2(s_in * f_out, 0);
    for (std::size_t so = 0; so < s_out; ++so) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            const real go = grad_out(so, fo);
            g.time_kernel[so] += go * pre_tau[so * f_out + fo];
            const real gp = go * p.time_kernel[so];
            g_pre[so * f_out + fo] = gp;
            g.time_bias[so] += gp;
        }
    }
    for (std::size_t so = 0; so < s_out; ++so) {
        for (std::size_t s = 0; s < s_in; ++s) {
            real acc = 0;
            for (std::size_t fo = 0; fo < f_out; ++fo) acc += g_pre[so * f_out + fo] * t2[s * f_out + fo];
            g_wt[so * s_in + s] = acc;
        }
    }
    for (std::size_t s = 0; s < s_in; ++s) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            real acc = 0;
            for (std::size_t so = 0; so < s_out; ++so) acc += p.time_weights(so, s) * g_pre[so * f_out + fo];
            g_t2[s * f_out + fo] = acc;
        }
    }
    g.time_weights = SequenceTensor(s_out, s_in, std::move(g_wt));

    // stage 2 adjoint
    std::vector<real> g_q(s_in * f_out);
    std::vector<real> g_wx(f_out * f_in, 0);
    std::vector<real> g_t1(s_in * f_in, 0);
    for (std::size_t s = 0; s < s_in; ++s) {
        for (std::size_t fo = 0; fo < f_out; ++fo) {
            const real gt2 = g_t2[s * f_out + fo];
            g.feature_kernel[fo] += gt2 * q[s * f_out + fo];
            const real gq = gt2 * p.feature_kernel[fo];
            g_q[s * f_out + fo] = gq;
            g.feature_bias[fo] += gq;
            for (std::size_t f = 0; f < f_in; ++f) {
                g_wx[fo * f_in + f] += gq * t1[s * f_in + f];
                g_t1[s * f_in + f] += gq * p.feature_weights(fo, f);
            }
        }
    }
    g.feature_weights = SequenceTensor(f_out, f_in, std::move(g_wx));

    // stage 1 adjoint
    std::vector<real> g_x(s_in * f_in);
    for (std::size_t s = 0; s < s_in; ++s) {
        for (std::size_t f = 0; f < f_in; ++f) {
            g.base_kernel[s] += g_t1[s * f_in + f] * x(s, f);
            g_x[s * f_in + f] = g_t1[s * f_in + f] * p.base_kernel[s];
        }
    }
    return {std::move(g), SequenceTensor(s_in, f_in, std::move(g_x))};
}

inline SequenceTensor conv1d_forward(const DepthwiseConvParams& p, const SequenceTensor& x) {
    if (x.cols() != p.channels()) {
        throw shape_error("conv1d_forward: input " + x.shape_string() + " does not match " +
                          std::to_string(p.channels()) + " channels");
    }
    if (p.receptive_field() > x.rows()) {
        throw config_error("conv1d_forward: receptive field " +
                           std::to_string(p.receptive_field()) + " exceeds sequence length " +
                           std::to_string(x.rows()));
    }
    const std::size_t n = x.rows(), nq = p.channels(), k = p.kernel_size(), d = p.dilation;
    std::vector<real> out(n * nq);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t q = 0; q < nq; ++q) {
            real acc = p.bias[q];
            for (std::size_t r = 0; r < k; ++r) {
                const std::size_t lag = r * d;
                if (lag > t) break; // left zero padding
                acc += p.kernel(r, q) * x(t - lag, q);
            }
            out[t * nq + q] = acc;
        }
    }
    return SequenceTensor(n, nq, std::move(out));
}

/// Adjoint of the causal depthwise convolution: the kernel gradient is the
/// causal cross-correlation of grad_out with x, the input gradient the
/// anti-causal convolution of grad_out with the kernel.
inline std::pair<DepthwiseConvGrads, SequenceTensor> conv1d_backward(
    const DepthwiseConvParams& p, const SequenceTensor& x, const SequenceTensor& grad_out) {
    if (x.cols() != p.channels()) {
        throw shape_error("conv1d_backward: input " + x.shape_string() + " does not match " +
                          std::to_string(p.channels()) + " channels");
    }
    if (!grad_out.same_shape(x)) {
        throw shape_error("conv1d_backward: grad_out " + grad_out.shape_string() +
                          " does not match input " + x.shape_string());
    }
    const std::size_t n = x.rows(), nq = p.channels(), k = p.kernel_size(), d = p.dilation;
    std::vector<real> g_kernel(k * nq, 0);
    std::vector<real> g_bias(nq, 0);
    std::vector<real> g_x(n * nq, 0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t q = 0; q < nq; ++q) {
            const real go = grad_out(t, q);
            g_bias[q] += go;
            for (std::size_t r = 0; r < k; ++r) {
                const std::size_t lag = r * d;
                if (lag > t) break;
                g_kernel[r * nq + q] += go * x(t - lag, q);
                g_x[(t - lag) * nq + q] += go * p.kernel(r, q);
            }
        }
    }
    DepthwiseConvGrads g{SequenceTensor(k, nq, std::move(g_kernel)), std::move(g_bias)};
    return {std::move(g), SequenceTensor(n, nq, std::move(g_x))};
}

} // namespace tln
