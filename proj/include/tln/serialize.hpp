#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tln/baselines.hpp"
#include "tln/equivalence.hpp"
#include "tln/model.hpp"
#include "tln/train.hpp"

namespace tln {

inline constexpr int model_file_version = 1;

enum class ModelFileKind { tln, equivalent, flat };

namespace detail {

using json = nlohmann::json;

inline json tensor_to_json(const SequenceTensor& t) {
    return json{{"rows", t.rows()},
                {"cols", t.cols()},
                {"data", std::vector<real>(t.data().begin(), t.data().end())}};
}

inline SequenceTensor tensor_from_json(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        throw parse_error(what + ": expected {rows, cols, data}");
    }
    try {
        return SequenceTensor(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                              j.at("data").get<std::vector<real>>());
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        throw parse_error(what + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw parse_error(path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw io_error("write failed for " + path);
}

inline json config_to_json(const TlnConfig& cfg) {
    json j{{"input_seq_len", cfg.input_seq_len},
           {"input_features", cfg.input_features},
           {"output_seq_len", cfg.output_seq_len},
           {"output_features", cfg.output_features},
           {"use_convolution", cfg.use_convolution},
           {"dilation_schedule", cfg.dilation_schedule},
           {"seed", cfg.seed}};
    if (cfg.hidden_shapes) {
        json shapes = json::array();
        for (const auto& h : *cfg.hidden_shapes) shapes.push_back({h.seq_len, h.features});
        j["hidden_shapes"] = std::move(shapes);
    } else {
        j["hidden_shapes"] = nullptr;
    }
    if (cfg.conv_kernel_size) {
        j["conv_kernel_size"] = *cfg.conv_kernel_size;
    } else {
        j["conv_kernel_size"] = nullptr;
    }
    return j;
}

inline TlnConfig config_from_json(const json& j) {
    TlnConfig cfg;
    try {
        cfg.input_seq_len = j.at("input_seq_len").get<std::size_t>();
        cfg.input_features = j.at("input_features").get<std::size_t>();
        cfg.output_seq_len = j.at("output_seq_len").get<std::size_t>();
        cfg.output_features = j.at("output_features").get<std::size_t>();
        cfg.use_convolution = j.at("use_convolution").get<bool>();
        cfg.dilation_schedule = j.at("dilation_schedule").get<std::vector<std::size_t>>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("hidden_shapes").is_null()) {
            std::vector<LayerShape> shapes;
            for (const auto& h : j.at("hidden_shapes")) {
                shapes.push_back({h.at(0).get<std::size_t>(), h.at(1).get<std::size_t>()});
            }
            cfg.hidden_shapes = std::move(shapes);
        }
        if (!j.at("conv_kernel_size").is_null()) {
            cfg.conv_kernel_size = j.at("conv_kernel_size").get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw parse_error(std::string("model config: ") + e.what());
    }
    return cfg;
}

} // namespace detail

inline void save_model(const TlnModel& m, const std::string& path) {
    detail::json layers = detail::json::array();
    for (const auto& layer : m.layers) {
        detail::json l{{"seqdense",
                        {{"base_kernel", layer.dense.base_kernel},
                         {"feature_weights", detail::tensor_to_json(layer.dense.feature_weights)},
                         {"feature_bias", layer.dense.feature_bias},
                         {"feature_kernel", layer.dense.feature_kernel},
                         {"time_weights", detail::tensor_to_json(layer.dense.time_weights)},
                         {"time_bias", layer.dense.time_bias},
                         {"time_kernel", layer.dense.time_kernel}}}};
        if (layer.conv) {
            l["conv"] = detail::json{{"kernel", detail::tensor_to_json(layer.conv->kernel)},
                                     {"bias", layer.conv->bias},
                                     {"dilation", layer.conv->dilation}};
        } else {
            l["conv"] = nullptr;
        }
        layers.push_back(std::move(l));
    }
    detail::write_json_file(detail::json{{"version", model_file_version},
                                         {"config", detail::config_to_json(m.config)},
                                         {"layers", std::move(layers)}},
                            path);
}

inline TlnModel load_model(const std::string& path) {
    const auto j = detail::read_json_file(path);
    if (!j.contains("version") || !j.contains("config") || !j.contains("layers")) {
        throw parse_error(path + ": not a model file (expected version/config/layers)");
    }
    if (j.at("version").get<int>() != model_file_version) {
        throw parse_error(path + ": unsupported version " + j.at("version").dump());
    }
    TlnModel m;
    m.config = detail::config_from_json(j.at("config"));
    const auto chain = detail::shape_chain(m.config);
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != chain.size() - 1) {
        throw shape_error(path + ": config declares " + std::to_string(chain.size() - 1) +
                          " layers, file has " + std::to_string(layers.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string where = path + ": layer " + std::to_string(i);
        const auto& l = layers[i];
        if (!l.contains("seqdense")) throw parse_error(where + ": missing seqdense block");
        const auto& d = l.at("seqdense");
        SequentialDenseParams dense = [&] {
            try {
                return SequentialDenseParams{
                    d.at("base_kernel").get<std::vector<real>>(),
                    detail::tensor_from_json(d.at("feature_weights"), where + " feature_weights"),
                    d.at("feature_bias").get<std::vector<real>>(),
                    d.at("feature_kernel").get<std::vector<real>>(),
                    detail::tensor_from_json(d.at("time_weights"), where + " time_weights"),
                    d.at("time_bias").get<std::vector<real>>(),
                    d.at("time_kernel").get<std::vector<real>>(),
                };
            } catch (const error&) {
                throw;
            } catch (const std::exception& e) {
                throw parse_error(where + ": " + e.what());
            }
        }();
        try {
            dense.validate();
        } catch (const error& e) {
            throw shape_error(where + ": " + e.what());
        }
        if (dense.input_seq_len() != chain[i].seq_len ||
            dense.input_features() != chain[i].features ||
            dense.output_seq_len() != chain[i + 1].seq_len ||
            dense.output_features() != chain[i + 1].features) {
            throw shape_error(where + ": shape (" + std::to_string(dense.input_seq_len()) + "," +
                              std::to_string(dense.input_features()) + ")->(" +
                              std::to_string(dense.output_seq_len()) + "," +
                              std::to_string(dense.output_features()) +
                              ") does not match the config chain");
        }
        std::optional<DepthwiseConvParams> conv;
        const bool has_conv = l.contains("conv") && !l.at("conv").is_null();
        if (has_conv != m.config.use_convolution) {
            throw shape_error(where + ": conv block " + (has_conv ? "present" : "missing") +
                              " but config.use_convolution is " +
                              (m.config.use_convolution ? "true" : "false"));
        }
        if (has_conv) {
            const auto& cj = l.at("conv");
            try {
                conv = DepthwiseConvParams{
                    detail::tensor_from_json(cj.at("kernel"), where + " conv kernel"),
                    cj.at("bias").get<std::vector<real>>(),
                    cj.at("dilation").get<std::size_t>(),
                };
            } catch (const error&) {
                throw;
            } catch (const std::exception& e) {
                throw parse_error(where + ": " + e.what());
            }
            try {
                conv->validate();
            } catch (const error& e) {
                throw shape_error(where + ": " + e.what());
            }
            if (conv->channels() != chain[i + 1].features) {
                throw shape_error(where + ": conv has " + std::to_string(conv->channels()) +
                                  " channels for " + std::to_string(chain[i + 1].features) +
                                  " features");
            }
            if (conv->receptive_field() > chain[i + 1].seq_len) {
                throw shape_error(where + ": conv receptive field " +
                                  std::to_string(conv->receptive_field()) +
                                  " exceeds sequence length " +
                                  std::to_string(chain[i + 1].seq_len));
            }
        }
        m.layers.push_back(TlnLayer{std::move(dense), std::move(conv)});
    }
    return m;
}

inline void save_equivalent(const EquivalentLinear& eq, const std::string& path) {
    detail::write_json_file(
        detail::json{{"version", model_file_version},
                     {"equivalent",
                      {{"input_seq_len", eq.input_seq_len()},
                       {"input_features", eq.input_features()},
                       {"weights", detail::tensor_to_json(eq.weights())},
                       {"bias", detail::tensor_to_json(eq.bias())}}}},
        path);
}

inline EquivalentLinear load_equivalent(const std::string& path) {
    const auto j = detail::read_json_file(path);
    if (!j.contains("equivalent")) {
        throw parse_error(path + ": not an equivalent-model file");
    }
    const auto& e = j.at("equivalent");
    try {
        return EquivalentLinear(e.at("input_seq_len").get<std::size_t>(),
                                e.at("input_features").get<std::size_t>(),
                                detail::tensor_from_json(e.at("weights"), path + ": weights"),
                                detail::tensor_from_json(e.at("bias"), path + ": bias"));
    } catch (const error&) {
        throw;
    } catch (const std::exception& ex) {
        throw parse_error(path + ": " + ex.what());
    }
}

namespace detail {

inline std::string penalty_name(PenaltyKind k) {
    switch (k) {
        case PenaltyKind::none: return "none";
        case PenaltyKind::ridge: return "ridge";
        case PenaltyKind::lasso: return "lasso";
        case PenaltyKind::elasticnet: return "elasticnet";
    }
    return "none";
}

inline PenaltyKind penalty_from_name(const std::string& s) {
    if (s == "none") return PenaltyKind::none;
    if (s == "ridge") return PenaltyKind::ridge;
    if (s == "lasso") return PenaltyKind::lasso;
    if (s == "elasticnet") return PenaltyKind::elasticnet;
    throw parse_error("unknown regularization kind: " + s);
}

} // namespace detail

inline void save_flat(const FlatLinearModel& m, const std::string& path) {
    detail::write_json_file(
        detail::json{{"version", model_file_version},
                     {"flat",
                      {{"weights", detail::tensor_to_json(m.weights)},
                       {"intercept", m.intercept},
                       {"regularization",
                        {{"kind", detail::penalty_name(m.regularization.kind)},
                         {"alpha", m.regularization.alpha},
                         {"l1_ratio", m.regularization.l1_ratio}}},
                       {"converged", m.converged},
                       {"sweeps", m.sweeps}}}},
        path);
}

inline FlatLinearModel load_flat(const std::string& path) {
    const auto j = detail::read_json_file(path);
    if (!j.contains("flat")) throw parse_error(path + ": not a flat-model file");
    const auto& f = j.at("flat");
    try {
        FlatLinearModel m{
            detail::tensor_from_json(f.at("weights"), path + ": weights"),
            f.at("intercept").get<std::vector<real>>(),
            Regularization{
                detail::penalty_from_name(f.at("regularization").at("kind").get<std::string>()),
                f.at("regularization").at("alpha").get<real>(),
                f.at("regularization").at("l1_ratio").get<real>()},
            f.at("converged").get<bool>(),
            f.at("sweeps").get<std::size_t>(),
        };
        if (m.intercept.size() != m.weights.cols()) {
            throw shape_error(path + ": intercept length " + std::to_string(m.intercept.size()) +
                              " does not match " + std::to_string(m.weights.cols()) + " outputs");
        }
        return m;
    } catch (const error&) {
        throw;
    } catch (const std::exception& ex) {
        throw parse_error(path + ": " + ex.what());
    }
}

inline void save_report_json(const TrainReport& r, const std::string& path) {
    detail::write_json_file(detail::json{{"version", model_file_version},
                                         {"report",
                                          {{"train_loss", r.train_loss},
                                           {"val_loss", r.val_loss},
                                           {"best_epoch", r.best_epoch},
                                           {"best_val_loss", r.best_val_loss},
                                           {"wall_seconds", r.wall_seconds},
                                           {"snapshot_id", r.snapshot_id}}}},
                            path);
}

inline void save_report_csv(const TrainReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < r.epochs_run(); ++e) {
        out << (e + 1) << ',' << detail::format_real(r.train_loss[e]) << ','
            << detail::format_real(r.val_loss[e]) << '\n';
    }
    if (!out) throw io_error("write failed for " + path);
}

inline ModelFileKind peek_model_kind(const std::string& path) {
    const auto j = detail::read_json_file(path);
    if (j.contains("layers")) return ModelFileKind::tln;
    if (j.contains("equivalent")) return ModelFileKind::equivalent;
    if (j.contains("flat")) return ModelFileKind::flat;
    throw parse_error(path + ": unrecognized model file (no layers/equivalent/flat key)");
}

} // namespace tln
