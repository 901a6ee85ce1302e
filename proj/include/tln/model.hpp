#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tln/layers.hpp"
#include "tln/tensor.hpp"

namespace tln {

struct LayerShape {
    std::size_t seq_len = 1;
    std::size_t features = 1;

    bool operator==(const LayerShape&) const = default;
};

/// Network architecture. hidden_shapes semantics:
///   - nullopt: two hidden layers of (output_seq_len, input_features)
///   - engaged empty list: single layer straight to (output_seq_len, output_features)
///   - engaged non-empty: intermediate output shapes in order
/// conv_kernel_size nullopt means per-layer min(3, seq_len); an explicit size
/// must fit every layer. An empty dilation_schedule means 2^l per layer,
/// clamped so the receptive field fits; an explicit schedule is validated
/// strictly.
struct TlnConfig {
    std::size_t input_seq_len = 1;
    std::size_t input_features = 1;
    std::size_t output_seq_len = 1;
    std::size_t output_features = 1;
    std::optional<std::vector<LayerShape>> hidden_shapes;
    bool use_convolution = true;
    std::optional<std::size_t> conv_kernel_size;
    std::vector<std::size_t> dilation_schedule;
    std::uint64_t seed = 0;
};

struct TlnLayer {
    SequentialDenseParams dense;
    std::optional<DepthwiseConvParams> conv;
};

struct TlnModel {
    TlnConfig config;
    std::vector<TlnLayer> layers;
};

struct TlnLayerGrads {
    SequentialDenseGrads dense;
    std::optional<DepthwiseConvGrads> conv;
};

struct ModelGrads {
    std::vector<TlnLayerGrads> layers;
    SequenceTensor input = SequenceTensor::zeros(1, 1);
};

/// One named contiguous span of the flat parameter vector.
struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

namespace detail {

inline std::vector<LayerShape> shape_chain(const TlnConfig& cfg) {
    std::vector<LayerShape> chain;
    chain.push_back({cfg.input_seq_len, cfg.input_features});
    if (cfg.hidden_shapes) {
        for (const auto& h : *cfg.hidden_shapes) chain.push_back(h);
    } else {
        chain.push_back({cfg.output_seq_len, cfg.input_features});
        chain.push_back({cfg.output_seq_len, cfg.input_features});
    }
    chain.push_back({cfg.output_seq_len, cfg.output_features});
    return chain;
}

inline std::size_t auto_kernel_size(std::size_t seq_len) { return seq_len < 3 ? seq_len : 3; }

} // namespace detail

/// Validates cfg and returns a copy with hidden_shapes materialized and,
/// when convolution is on, the dilation schedule filled in per layer.
inline TlnConfig resolve_config(const TlnConfig& cfg) {
    if (cfg.input_seq_len < 1 || cfg.input_features < 1 || cfg.output_seq_len < 1 ||
        cfg.output_features < 1) {
        throw config_error("TlnConfig: all input/output dimensions must be >= 1");
    }
    TlnConfig out = cfg;
    const auto chain = detail::shape_chain(cfg);
    out.hidden_shapes.emplace(chain.begin() + 1, chain.end() - 1);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        if (chain[i + 1].seq_len < 1 || chain[i + 1].features < 1) {
            throw config_error("TlnConfig: layer " + std::to_string(i) +
                               " output shape must be >= (1,1)");
        }
    }
    const std::size_t n_layers = chain.size() - 1;
    if (!cfg.use_convolution) return out;

    if (!cfg.dilation_schedule.empty() && cfg.dilation_schedule.size() != n_layers) {
        throw config_error("TlnConfig: dilation_schedule has " +
                           std::to_string(cfg.dilation_schedule.size()) + " entries for " +
                           std::to_string(n_layers) + " layers");
    }
    if (cfg.conv_kernel_size && *cfg.conv_kernel_size < 1) {
        throw config_error("TlnConfig: conv_kernel_size must be >= 1");
    }
    out.dilation_schedule.clear();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t s = chain[l + 1].seq_len;
        const std::size_t k = cfg.conv_kernel_size ? *cfg.conv_kernel_size
                                                   : detail::auto_kernel_size(s);
        if (cfg.conv_kernel_size && k > s) {
            throw config_error("TlnConfig: conv kernel size " + std::to_string(k) +
                               " exceeds layer " + std::to_string(l) + " sequence length " +
                               std::to_string(s));
        }
        std::size_t d;
        if (!cfg.dilation_schedule.empty()) {
            d = cfg.dilation_schedule[l];
            if (d < 1) {
                throw config_error("TlnConfig: dilation_schedule entry " + std::to_string(l) +
                                   " must be >= 1");
            }
        } else {
            d = std::size_t{1} << (l < 62 ? l : 62);
            if (k > 1) {
                const std::size_t max_d = (s - 1) / (k - 1);
                if (d > max_d) d = max_d;
            } else {
                d = 1;
            }
        }
        if ((k - 1) * d + 1 > s) {
            throw config_error("TlnConfig: conv receptive field " +
                               std::to_string((k - 1) * d + 1) + " exceeds layer " +
                               std::to_string(l) + " sequence length " + std::to_string(s));
        }
        out.dilation_schedule.push_back(d);
    }
    return out;
}

/// Deterministic initialization: multiplicative kernels all ones, dense
/// weights uniform in +/- sqrt(6 / (fan_in + fan_out)), biases zero, conv
/// kernels set to the identity tap (current-position tap = 1).
inline TlnModel build_model(const TlnConfig& cfg) {
    TlnModel m;
    m.config = resolve_config(cfg);
    const auto chain = detail::shape_chain(m.config);
    std::mt19937_64 rng(m.config.seed);

    auto glorot = [&rng](std::size_t rows, std::size_t cols) {
        const real limit = std::sqrt(real(6) / real(rows + cols));
        std::uniform_real_distribution<real> dist(-limit, limit);
        std::vector<real> w(rows * cols);
        for (auto& v : w) v = dist(rng);
        return SequenceTensor(rows, cols, std::move(w));
    };

    for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
        const auto [s_in, f_in] = chain[l];
        const auto [s_out, f_out] = chain[l + 1];
        TlnLayer layer{
            SequentialDenseParams{
                std::vector<real>(s_in, 1),
                glorot(f_out, f_in),
                std::vector<real>(f_out, 0),
                std::vector<real>(f_out, 1),
                glorot(s_out, s_in),
                std::vector<real>(s_out, 0),
                std::vector<real>(s_out, 1),
            },
            std::nullopt,
        };
        if (m.config.use_convolution) {
            const std::size_t k = m.config.conv_kernel_size
                                      ? *m.config.conv_kernel_size
                                      : detail::auto_kernel_size(s_out);
            std::vector<real> kernel(k * f_out, 0);
            for (std::size_t q = 0; q < f_out; ++q) kernel[q] = 1; // current-position tap
            layer.conv = DepthwiseConvParams{SequenceTensor(k, f_out, std::move(kernel)),
                                             std::vector<real>(f_out, 0),
                                             m.config.dilation_schedule[l]};
        }
        layer.dense.validate();
        if (layer.conv) layer.conv->validate();
        m.layers.push_back(std::move(layer));
    }
    return m;
}

inline SequenceTensor forward(const TlnModel& m, const SequenceTensor& x) {
    SequenceTensor h = x;
    for (const auto& layer : m.layers) {
        h = seqdense_forward(layer.dense, h);
        if (layer.conv) h = conv1d_forward(*layer.conv, h);
    }
    return h;
}

inline std::size_t param_count(const TlnModel& m) {
    std::size_t n = 0;
    for (const auto& layer : m.layers) {
        const auto& d = layer.dense;
        n += d.base_kernel.size() + d.feature_weights.size() + d.feature_bias.size() +
             d.feature_kernel.size() + d.time_weights.size() + d.time_bias.size() +
             d.time_kernel.size();
        if (layer.conv) n += layer.conv->kernel.size() + layer.conv->bias.size();
    }
    return n;
}

/// Reverse-mode pass through the whole stack. grad_out is the loss gradient
/// at the model output; the returned struct carries one grads entry per
/// layer plus the gradient w.r.t. the input window.
inline ModelGrads backward(const TlnModel& m, const SequenceTensor& x,
                           const SequenceTensor& grad_out) {
    std::vector<SequenceTensor> dense_inputs;  // input to each seqdense
    std::vector<SequenceTensor> conv_inputs;   // input to each conv (when present)
    dense_inputs.reserve(m.layers.size());
    conv_inputs.reserve(m.layers.size());
    SequenceTensor h = x;
    for (const auto& layer : m.layers) {
        dense_inputs.push_back(h);
        h = seqdense_forward(layer.dense, h);
        conv_inputs.push_back(h);
        if (layer.conv) h = conv1d_forward(*layer.conv, h);
    }

    ModelGrads grads;
    grads.layers.reserve(m.layers.size());
    SequenceTensor g = grad_out;
    for (std::size_t i = m.layers.size(); i-- > 0;) {
        const auto& layer = m.layers[i];
        std::optional<DepthwiseConvGrads> conv_grads;
        if (layer.conv) {
            auto [cg, gin] = conv1d_backward(*layer.conv, conv_inputs[i], g);
            conv_grads = std::move(cg);
            g = std::move(gin);
        }
        auto [dg, gin] = seqdense_backward(layer.dense, dense_inputs[i], g);
        grads.layers.push_back(TlnLayerGrads{std::move(dg), std::move(conv_grads)});
        g = std::move(gin);
    }
    std::reverse(grads.layers.begin(), grads.layers.end());
    grads.input = std::move(g);
    return grads;
}

namespace detail {

// Visits every parameter block of a model in the canonical flat order.
// fn(name, values) is called once per block.
template <typename LayerVec, typename Fn>
void visit_blocks(LayerVec& layers, Fn&& fn) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& l = layers[i];
        const std::string p = "layer" + std::to_string(i) + ".";
        fn(p + "base_kernel", l.dense.base_kernel);
        fn(p + "feature_weights", l.dense.feature_weights);
        fn(p + "feature_bias", l.dense.feature_bias);
        fn(p + "feature_kernel", l.dense.feature_kernel);
        fn(p + "time_weights", l.dense.time_weights);
        fn(p + "time_bias", l.dense.time_bias);
        fn(p + "time_kernel", l.dense.time_kernel);
        if (l.conv) {
            fn(p + "conv.kernel", l.conv->kernel);
            fn(p + "conv.bias", l.conv->bias);
        }
    }
}

inline std::span<const real> block_span(const std::vector<real>& v) { return v; }
inline std::span<const real> block_span(const SequenceTensor& t) { return t.data(); }

} // namespace detail

inline std::vector<ParamBlock> param_layout(const TlnModel& m) {
    std::vector<ParamBlock> blocks;
    std::size_t offset = 0;
    detail::visit_blocks(m.layers, [&](const std::string& name, const auto& values) {
        const std::size_t n = detail::block_span(values).size();
        blocks.push_back({name, offset, n});
        offset += n;
    });
    return blocks;
}

inline std::vector<real> pack_params(const TlnModel& m) {
    std::vector<real> flat;
    flat.reserve(param_count(m));
    detail::visit_blocks(m.layers, [&](const std::string&, const auto& values) {
        const auto s = detail::block_span(values);
        flat.insert(flat.end(), s.begin(), s.end());
    });
    return flat;
}

inline void unpack_params(TlnModel& m, std::span<const real> flat) {
    if (flat.size() != param_count(m)) {
        throw shape_error("unpack_params: got " + std::to_string(flat.size()) +
                          " values, model has " + std::to_string(param_count(m)));
    }
    std::size_t offset = 0;
    detail::visit_blocks(m.layers, [&](const std::string&, auto& values) {
        using T = std::decay_t<decltype(values)>;
        if constexpr (std::is_same_v<T, SequenceTensor>) {
            std::vector<real> data(flat.begin() + offset, flat.begin() + offset + values.size());
            offset += values.size();
            values = SequenceTensor(values.rows(), values.cols(), std::move(data));
        } else {
            for (auto& v : values) v = flat[offset++];
        }
    });
}

inline std::vector<real> pack_grads(const ModelGrads& g) {
    std::vector<real> flat;
    detail::visit_blocks(g.layers, [&](const std::string&, const auto& values) {
        const auto s = detail::block_span(values);
        flat.insert(flat.end(), s.begin(), s.end());
    });
    return flat;
}

} // namespace tln
