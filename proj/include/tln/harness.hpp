#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "tln/baselines.hpp"
#include "tln/data.hpp"
#include "tln/error.hpp"
#include "tln/metrics.hpp"
#include "tln/model.hpp"
#include "tln/serialize.hpp"
#include "tln/train.hpp"

namespace tln {

enum class SweepModel { tln, tln_no_conv, ols, ridge, lasso, elasticnet };

inline std::string sweep_model_name(SweepModel m) {
    switch (m) {
        case SweepModel::tln: return "tln";
        case SweepModel::tln_no_conv: return "tln_no_conv";
        case SweepModel::ols: return "ols";
        case SweepModel::ridge: return "ridge";
        case SweepModel::lasso: return "lasso";
        case SweepModel::elasticnet: return "elasticnet";
    }
    return "tln";
}

inline SweepModel sweep_model_from_name(const std::string& s) {
    if (s == "tln") return SweepModel::tln;
    if (s == "tln_no_conv") return SweepModel::tln_no_conv;
    if (s == "ols") return SweepModel::ols;
    if (s == "ridge") return SweepModel::ridge;
    if (s == "lasso") return SweepModel::lasso;
    if (s == "elasticnet") return SweepModel::elasticnet;
    throw parse_error("unknown sweep model '" + s + "'");
}

enum class SweepMetric { r2, mse };

inline std::string sweep_metric_name(SweepMetric m) {
    return m == SweepMetric::r2 ? "r2" : "mse";
}

inline SweepMetric sweep_metric_from_name(const std::string& s) {
    if (s == "r2") return SweepMetric::r2;
    if (s == "mse") return SweepMetric::mse;
    throw parse_error("unknown sweep metric '" + s + "'");
}

/// Grid definition for one dataset: every listed model is evaluated at every
/// (seq_len, horizon, seed) combination under the same variant flags.
struct SweepConfig {
    std::string dataset;
    std::string timestamp_column = "date";
    std::string target_column;
    std::vector<std::size_t> seq_lens = {3, 10, 20, 50, 100, 200, 400};
    std::vector<std::size_t> horizons = {1, 6, 15, 30, 90, 180, 360};
    std::vector<SweepModel> models = {SweepModel::tln,   SweepModel::tln_no_conv,
                                      SweepModel::ols,   SweepModel::ridge,
                                      SweepModel::lasso, SweepModel::elasticnet};
    bool multivariate = false;
    bool time_features = false;
    SweepMetric metric = SweepMetric::r2;
    std::vector<std::uint64_t> seeds = {0};
    ScalerKind scaler = ScalerKind::standard;
    std::array<real, 3> split = {0.7, 0.2, 0.1};
    real ridge_alpha = 1.0;
    real lasso_alpha = 0.01;
    real elasticnet_alpha = 0.01;
    real elasticnet_l1_ratio = 0.5;
    TrainConfig train;
    std::size_t jobs = 1;

    void validate() const {
        if (dataset.empty()) throw config_error("SweepConfig: dataset path is empty");
        if (target_column.empty()) throw config_error("SweepConfig: target_column is empty");
        if (seq_lens.empty() || horizons.empty() || models.empty() || seeds.empty()) {
            throw config_error("SweepConfig: seq_lens, horizons, models, seeds must be non-empty");
        }
        for (const auto s : seq_lens) {
            if (s < 1) throw config_error("SweepConfig: seq_lens must be positive");
        }
        for (const auto h : horizons) {
            if (h < 1) throw config_error("SweepConfig: horizons must be positive");
        }
        if (jobs < 1) throw config_error("SweepConfig: jobs must be >= 1");
        train.validate();
    }
};

enum class CellStatus { ok, insufficient_samples, failed };

inline std::string cell_status_name(CellStatus s) {
    switch (s) {
        case CellStatus::ok: return "ok";
        case CellStatus::insufficient_samples: return "insufficient-samples";
        case CellStatus::failed: return "failed";
    }
    return "failed";
}

struct SweepRow {
    SweepModel model = SweepModel::tln;
    std::size_t seq_len = 0;
    std::size_t horizon = 0;
    bool multivariate = false;
    bool time_features = false;
    std::uint64_t seed = 0;
    CellStatus status = CellStatus::failed;
    SweepMetric metric = SweepMetric::r2;
    real metric_value = std::numeric_limits<real>::quiet_NaN();
    std::size_t param_count = 0;
    double train_seconds = 0;
    std::string reason; // empty unless the cell did not complete
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

namespace detail {

struct SweepCell {
    SweepModel model;
    std::size_t seq_len;
    std::size_t horizon;
    std::uint64_t seed;
};

inline int sweep_model_order(SweepModel m) { return static_cast<int>(m); }

inline SweepRow run_sweep_cell(const TimeSeriesFrame& frame, const SweepConfig& cfg,
                               const SweepCell& cell) {
    SweepRow row;
    row.model = cell.model;
    row.seq_len = cell.seq_len;
    row.horizon = cell.horizon;
    row.multivariate = cfg.multivariate;
    row.time_features = cfg.time_features;
    row.seed = cell.seed;
    row.metric = cfg.metric;
    try {
        PipelineConfig pcfg;
        pcfg.target_column = cfg.target_column;
        pcfg.seq_len = cell.seq_len;
        pcfg.horizon = cell.horizon;
        pcfg.mode = cfg.multivariate ? InputMode::multivariate : InputMode::univariate;
        pcfg.time_features = cfg.time_features;
        pcfg.scaler = cfg.scaler;
        pcfg.split = cfg.split;
        const auto data = prepare_datasets_from_frame(frame, pcfg);
        const std::size_t features = data.train.feature_names.size();
        const std::size_t n_train = data.train.size();
        const std::size_t n_test = data.test.size();

        std::vector<real> predictions;
        std::vector<real> targets;
        predictions.reserve(n_test * cell.horizon);
        targets.reserve(n_test * cell.horizon);
        for (const auto& t : data.test.targets) {
            targets.insert(targets.end(), t.data().begin(), t.data().end());
        }

        const bool is_tln =
            cell.model == SweepModel::tln || cell.model == SweepModel::tln_no_conv;
        if (is_tln) {
            TlnConfig mc;
            mc.input_seq_len = cell.seq_len;
            mc.input_features = features;
            mc.output_seq_len = cell.horizon;
            mc.output_features = 1;
            mc.use_convolution = cell.model == SweepModel::tln;
            mc.seed = cell.seed;
            auto model = build_model(mc);
            TrainConfig tc = cfg.train;
            tc.seed = cell.seed;
            auto [fitted, report] = fit(model, data.train, data.val, tc);
            row.train_seconds = report.wall_seconds;
            row.param_count = param_count(fitted);
            for (const auto& x : data.test.inputs) {
                const auto pred = forward(fitted, x);
                predictions.insert(predictions.end(), pred.data().begin(), pred.data().end());
            }
        } else {
            const std::size_t p = cell.seq_len * features;
            if (cell.model == SweepModel::ols && n_train < p) {
                row.status = CellStatus::insufficient_samples;
                row.reason = "ols needs at least " + std::to_string(p) +
                             " training windows (one per column), got " + std::to_string(n_train);
                return row;
            }
            std::vector<real> design(n_train * p), ytrain(n_train * cell.horizon);
            for (std::size_t i = 0; i < n_train; ++i) {
                const auto x = data.train.inputs[i].data();
                std::copy(x.begin(), x.end(), design.begin() + i * p);
                const auto y = data.train.targets[i].data();
                std::copy(y.begin(), y.end(), ytrain.begin() + i * cell.horizon);
            }
            const auto problem =
                make_problem(SequenceTensor(n_train, p, std::move(design)),
                             SequenceTensor(n_train, cell.horizon, std::move(ytrain)));
            const auto started = std::chrono::steady_clock::now();
            FlatLinearModel fitted = [&] {
                switch (cell.model) {
                    case SweepModel::ridge: return fit_ridge(problem, cfg.ridge_alpha);
                    case SweepModel::lasso: return fit_lasso(problem, cfg.lasso_alpha);
                    case SweepModel::elasticnet:
                        return fit_elasticnet(problem, cfg.elasticnet_alpha,
                                              cfg.elasticnet_l1_ratio);
                    default: return fit_ols(problem);
                }
            }();
            row.train_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
            row.param_count = param_count(fitted);
            for (const auto& x : data.test.inputs) {
                const auto pred = predict_flat(fitted, flatten_window(x));
                predictions.insert(predictions.end(), pred.begin(), pred.end());
            }
        }

        row.metric_value = cfg.metric == SweepMetric::mse ? mse(targets, predictions)
                                                          : r2_score(targets, predictions);
        row.status = CellStatus::ok;
    } catch (const error& e) {
        row.status = CellStatus::failed;
        row.reason = e.what();
    }
    return row;
}

} // namespace detail

/// Runs the full grid. The dataset is loaded once and schema problems abort
/// before any cell runs; per-cell failures become rows with status and
/// reason. Rows come back sorted by (model, seq_len, horizon, seed).
inline SweepReport run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const TimeSeriesFrame frame = load_csv(cfg.dataset, cfg.timestamp_column, cfg.target_column);

    std::vector<detail::SweepCell> cells;
    cells.reserve(cfg.models.size() * cfg.seq_lens.size() * cfg.horizons.size() *
                  cfg.seeds.size());
    for (const auto model : cfg.models) {
        for (const auto s : cfg.seq_lens) {
            for (const auto h : cfg.horizons) {
                for (const auto seed : cfg.seeds) {
                    cells.push_back(detail::SweepCell{model, s, h, seed});
                }
            }
        }
    }

    SweepReport report;
    report.rows.resize(cells.size());
    const std::size_t workers = std::min(cfg.jobs, cells.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            report.rows[i] = detail::run_sweep_cell(frame, cfg, cells[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    report.rows[i] = detail::run_sweep_cell(frame, cfg, cells[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.model != b.model) {
            return detail::sweep_model_order(a.model) < detail::sweep_model_order(b.model);
        }
        if (a.seq_len != b.seq_len) return a.seq_len < b.seq_len;
        if (a.horizon != b.horizon) return a.horizon < b.horizon;
        return a.seed < b.seed;
    });
    return report;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

inline SweepConfig load_sweep_config(const std::string& path) {
    const auto j = detail::read_json_file(path);
    if (!j.is_object()) throw parse_error(path + ": sweep config must be a JSON object");
    static const std::vector<std::string> known = {
        "dataset",       "timestamp_column", "target_column",    "seq_lens",
        "horizons",      "models",           "multivariate",     "time_features",
        "metric",        "seeds",            "scaler",           "split",
        "ridge_alpha",   "lasso_alpha",      "elasticnet_alpha", "elasticnet_l1_ratio",
        "train",         "jobs"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw parse_error(path + ": unknown key '" + key + "' in sweep config");
        }
    }
    SweepConfig cfg;
    try {
        if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
        if (j.contains("timestamp_column")) {
            cfg.timestamp_column = j.at("timestamp_column").get<std::string>();
        }
        if (j.contains("target_column")) {
            cfg.target_column = j.at("target_column").get<std::string>();
        }
        if (j.contains("seq_lens")) {
            cfg.seq_lens = j.at("seq_lens").get<std::vector<std::size_t>>();
        }
        if (j.contains("horizons")) {
            cfg.horizons = j.at("horizons").get<std::vector<std::size_t>>();
        }
        if (j.contains("models")) {
            cfg.models.clear();
            for (const auto& name : j.at("models")) {
                cfg.models.push_back(sweep_model_from_name(name.get<std::string>()));
            }
        }
        if (j.contains("multivariate")) cfg.multivariate = j.at("multivariate").get<bool>();
        if (j.contains("time_features")) cfg.time_features = j.at("time_features").get<bool>();
        if (j.contains("metric")) {
            cfg.metric = sweep_metric_from_name(j.at("metric").get<std::string>());
        }
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("scaler")) {
            const auto name = j.at("scaler").get<std::string>();
            if (name == "minmax") {
                cfg.scaler = ScalerKind::minmax;
            } else if (name == "standard") {
                cfg.scaler = ScalerKind::standard;
            } else {
                throw parse_error(path + ": unknown scaler '" + name + "'");
            }
        }
        if (j.contains("split")) {
            const auto v = j.at("split").get<std::vector<real>>();
            if (v.size() != 3) {
                throw parse_error(path + ": split must have 3 fractions");
            }
            cfg.split = {v[0], v[1], v[2]};
        }
        if (j.contains("ridge_alpha")) cfg.ridge_alpha = j.at("ridge_alpha").get<real>();
        if (j.contains("lasso_alpha")) cfg.lasso_alpha = j.at("lasso_alpha").get<real>();
        if (j.contains("elasticnet_alpha")) {
            cfg.elasticnet_alpha = j.at("elasticnet_alpha").get<real>();
        }
        if (j.contains("elasticnet_l1_ratio")) {
            cfg.elasticnet_l1_ratio = j.at("elasticnet_l1_ratio").get<real>();
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            static const std::vector<std::string> train_known = {
                "learning_rate", "batch_size", "max_epochs",  "patience",
                "adam_beta1",    "adam_beta2", "adam_epsilon"};
            for (const auto& [key, _] : t.items()) {
                if (std::find(train_known.begin(), train_known.end(), key) ==
                    train_known.end()) {
                    throw parse_error(path + ": unknown key 'train." + key +
                                      "' in sweep config");
                }
            }
            if (t.contains("learning_rate")) {
                cfg.train.learning_rate = t.at("learning_rate").get<real>();
            }
            if (t.contains("batch_size")) {
                cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
            }
            if (t.contains("max_epochs")) {
                cfg.train.max_epochs = t.at("max_epochs").get<std::size_t>();
            }
            if (t.contains("patience")) cfg.train.patience = t.at("patience").get<std::size_t>();
            if (t.contains("adam_beta1")) cfg.train.adam_beta1 = t.at("adam_beta1").get<real>();
            if (t.contains("adam_beta2")) cfg.train.adam_beta2 = t.at("adam_beta2").get<real>();
            if (t.contains("adam_epsilon")) {
                cfg.train.adam_epsilon = t.at("adam_epsilon").get<real>();
            }
        }
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<std::size_t>();
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return cfg;
}

inline void save_sweep_report_csv(const SweepReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << "model,seq_len,horizon,multivariate,time_features,seed,status,metric,"
           "metric_value,param_count,train_seconds,reason\n";
    char secs[32];
    for (const auto& r : report.rows) {
        std::snprintf(secs, sizeof(secs), "%.6f", r.train_seconds);
        out << sweep_model_name(r.model) << ',' << r.seq_len << ',' << r.horizon << ','
            << (r.multivariate ? 1 : 0) << ',' << (r.time_features ? 1 : 0) << ',' << r.seed
            << ',' << cell_status_name(r.status) << ',' << sweep_metric_name(r.metric) << ','
            << (r.status == CellStatus::ok ? detail::format_real(r.metric_value) : "") << ','
            << r.param_count << ',' << secs << ',' << detail::csv_quote(r.reason) << '\n';
    }
    if (!out) throw io_error("write failed for " + path);
}

inline void save_sweep_report_json(const SweepReport& report, const std::string& path) {
    detail::json rows = detail::json::array();
    for (const auto& r : report.rows) {
        detail::json row{{"model", sweep_model_name(r.model)},
                         {"seq_len", r.seq_len},
                         {"horizon", r.horizon},
                         {"multivariate", r.multivariate},
                         {"time_features", r.time_features},
                         {"seed", r.seed},
                         {"status", cell_status_name(r.status)},
                         {"metric", sweep_metric_name(r.metric)},
                         {"param_count", r.param_count},
                         {"train_seconds", r.train_seconds},
                         {"reason", r.reason}};
        if (r.status == CellStatus::ok) {
            row["metric_value"] = r.metric_value;
        } else {
            row["metric_value"] = nullptr;
        }
        rows.push_back(std::move(row));
    }
    detail::write_json_file(detail::json{{"version", model_file_version}, {"rows", rows}}, path);
}

} // namespace tln
