#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "tln/equivalence.hpp"
#include "tln/harness.hpp"
#include "tln/serialize.hpp"

namespace {

using nlohmann::json;
using tln::real;

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* v = std::getenv("TLN_LOG");
    if (v == nullptr) return LogLevel::info;
    const std::string s(v);
    if (s == "error") return LogLevel::error;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << msg << '\n';
}

/// Optional JSON settings file shared by train and evaluate. Flags win over
/// anything listed here.
struct RunFileConfig {
    tln::TrainConfig train;
    std::optional<std::vector<tln::LayerShape>> hidden_shapes;
    std::optional<std::size_t> conv_kernel_size;
    std::vector<std::size_t> dilation_schedule;
    std::array<real, 3> split = {0.7, 0.2, 0.1};
    tln::ScalerKind scaler = tln::ScalerKind::standard;
};

RunFileConfig load_run_config(const std::string& path) {
    const auto j = tln::detail::read_json_file(path);
    if (!j.is_object()) throw tln::parse_error(path + ": config must be a JSON object");
    static const std::vector<std::string> known = {"train", "hidden_shapes", "conv_kernel_size",
                                                   "dilation_schedule", "split", "scaler"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw tln::parse_error(path + ": unknown key '" + key + "' in config");
        }
    }
    RunFileConfig cfg;
    try {
        if (j.contains("train")) {
            const auto& t = j.at("train");
            static const std::vector<std::string> train_known = {
                "learning_rate", "batch_size",   "max_epochs",   "patience",
                "adam_beta1",    "adam_beta2",   "adam_epsilon", "seed"};
            for (const auto& [key, _] : t.items()) {
                if (std::find(train_known.begin(), train_known.end(), key) ==
                    train_known.end()) {
                    throw tln::parse_error(path + ": unknown key 'train." + key + "' in config");
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
            if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
        }
        if (j.contains("hidden_shapes")) {
            std::vector<tln::LayerShape> shapes;
            for (const auto& pair : j.at("hidden_shapes")) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw tln::parse_error(path + ": hidden_shapes entries must be [seq, features]");
                }
                shapes.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
            }
            cfg.hidden_shapes = std::move(shapes);
        }
        if (j.contains("conv_kernel_size")) {
            cfg.conv_kernel_size = j.at("conv_kernel_size").get<std::size_t>();
        }
        if (j.contains("dilation_schedule")) {
            cfg.dilation_schedule = j.at("dilation_schedule").get<std::vector<std::size_t>>();
        }
        if (j.contains("split")) {
            const auto v = j.at("split").get<std::vector<real>>();
            if (v.size() != 3) throw tln::parse_error(path + ": split must have 3 fractions");
            cfg.split = {v[0], v[1], v[2]};
        }
        if (j.contains("scaler")) {
            const auto name = j.at("scaler").get<std::string>();
            if (name == "minmax") {
                cfg.scaler = tln::ScalerKind::minmax;
            } else if (name == "standard") {
                cfg.scaler = tln::ScalerKind::standard;
            } else {
                throw tln::parse_error(path + ": unknown scaler '" + name + "'");
            }
        }
    } catch (const tln::error&) {
        throw;
    } catch (const std::exception& e) {
        throw tln::parse_error(path + ": " + e.what());
    }
    return cfg;
}

/// Too little data for the requested window is a data problem (exit 3), not a
/// flag problem, so the window-size failure is retagged here.
tln::DatasetBundle prepare_or_retag(const tln::PipelineConfig& pcfg) {
    try {
        return tln::prepare_datasets(pcfg);
    } catch (const tln::config_error& e) {
        const std::string msg = e.what();
        if (msg.find("frame length") != std::string::npos) {
            throw tln::data_error("insufficient rows: " + msg);
        }
        throw;
    }
}

struct DataFlags {
    std::string data;
    std::string target;
    std::string timestamp_column = "date";
    bool multivariate = false;
    bool time_features = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool required) {
    auto* data = cmd->add_option("--data", flags.data, "CSV file with a timestamp column");
    auto* target = cmd->add_option("--target", flags.target, "column to forecast");
    if (required) {
        data->required();
        target->required();
    }
    cmd->add_option("--timestamp-column", flags.timestamp_column, "timestamp column name");
    cmd->add_flag("--multivariate", flags.multivariate, "use every column as an input feature");
    cmd->add_flag("--time-features", flags.time_features, "append hour and day-of-week columns");
}

tln::PipelineConfig pipeline_from_flags(const DataFlags& flags, std::size_t seq_len,
                                        std::size_t horizon, const RunFileConfig& file) {
    tln::PipelineConfig pcfg;
    pcfg.csv_path = flags.data;
    pcfg.timestamp_column = flags.timestamp_column;
    pcfg.target_column = flags.target;
    pcfg.seq_len = seq_len;
    pcfg.horizon = horizon;
    pcfg.mode = flags.multivariate ? tln::InputMode::multivariate : tln::InputMode::univariate;
    pcfg.time_features = flags.time_features;
    pcfg.scaler = file.scaler;
    pcfg.split = file.split;
    return pcfg;
}

std::string default_report_path(const std::string& model_path) {
    const std::string suffix = ".json";
    if (model_path.size() > suffix.size() &&
        model_path.compare(model_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return model_path.substr(0, model_path.size() - suffix.size()) + ".report.json";
    }
    return model_path + ".report.json";
}

tln::FlatRegressionProblem problem_from_dataset(const tln::WindowedDataset& ds) {
    const std::size_t n = ds.size();
    const std::size_t p = ds.seq_len * ds.feature_names.size();
    const std::size_t k = ds.horizon;
    std::vector<real> design(n * p), targets(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = ds.inputs[i].data();
        std::copy(x.begin(), x.end(), design.begin() + i * p);
        const auto y = ds.targets[i].data();
        std::copy(y.begin(), y.end(), targets.begin() + i * k);
    }
    return tln::make_problem(tln::SequenceTensor(n, p, std::move(design)),
                             tln::SequenceTensor(n, k, std::move(targets)));
}

const tln::WindowedDataset& pick_split(const tln::DatasetBundle& data, const std::string& name) {
    if (name == "train") return data.train;
    if (name == "val") return data.val;
    return data.test;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    DataFlags data;
    std::size_t seq_len = 0;
    std::size_t horizon = 1;
    std::string model_kind = "tln";
    std::string config_path;
    std::string out = "model.json";
    std::string report_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int cmd_train(const TrainArgs& args) {
    RunFileConfig file;
    if (!args.config_path.empty()) file = load_run_config(args.config_path);
    tln::TrainConfig tc = file.train;
    if (args.seed_given) tc.seed = args.seed;

    const auto data =
        prepare_or_retag(pipeline_from_flags(args.data, args.seq_len, args.horizon, file));
    const std::size_t features = data.train.feature_names.size();
    log_info("loaded " + args.data.data + ": " + std::to_string(data.train.size()) + "/" +
             std::to_string(data.val.size()) + "/" + std::to_string(data.test.size()) +
             " train/val/test windows, " + std::to_string(features) + " features");

    tln::TlnConfig mc;
    mc.input_seq_len = args.seq_len;
    mc.input_features = features;
    mc.output_seq_len = args.horizon;
    mc.output_features = 1;
    mc.hidden_shapes = file.hidden_shapes;
    mc.use_convolution = args.model_kind == "tln";
    mc.conv_kernel_size = file.conv_kernel_size;
    mc.dilation_schedule = file.dilation_schedule;
    mc.seed = tc.seed;

    auto model = tln::build_model(mc);
    log_debug("model has " + std::to_string(tln::param_count(model)) + " parameters in " +
              std::to_string(model.layers.size()) + " layers");
    auto [fitted, report] = tln::fit(model, data.train, data.val, tc);

    tln::save_model(fitted, args.out);
    const auto report_path =
        args.report_path.empty() ? default_report_path(args.out) : args.report_path;
    tln::save_report_json(report, report_path);
    log_info("best epoch " + std::to_string(report.best_epoch) + " of " +
             std::to_string(report.epochs_run()) + ", model written to " + args.out);

    json out{{"model", args.out},
             {"report", report_path},
             {"param_count", tln::param_count(fitted)},
             {"epochs_run", report.epochs_run()},
             {"best_epoch", report.best_epoch},
             {"best_val_loss", report.best_val_loss},
             {"wall_seconds", report.wall_seconds},
             {"snapshot_id", report.snapshot_id}};
    std::cout << out.dump() << '\n';
    return 0;
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateArgs {
    DataFlags data;
    std::string model_path;
    std::string split_name = "test";
    std::string metric = "mse";
    std::string config_path;
    bool per_horizon = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
    RunFileConfig file;
    if (!args.config_path.empty()) file = load_run_config(args.config_path);

    const auto kind = tln::peek_model_kind(args.model_path);
    std::optional<tln::TlnModel> tln_model;
    std::optional<tln::EquivalentLinear> eq_model;
    std::optional<tln::FlatLinearModel> flat_model;
    std::size_t seq_len = 0, horizon = 0, expect_features = 0;
    if (kind == tln::ModelFileKind::tln) {
        tln_model = tln::load_model(args.model_path);
        seq_len = tln_model->config.input_seq_len;
        horizon = tln_model->config.output_seq_len;
        expect_features = tln_model->config.input_features;
        if (tln_model->config.output_features != 1) {
            throw tln::data_error("evaluate: model predicts " +
                                  std::to_string(tln_model->config.output_features) +
                                  " output features, datasets provide 1");
        }
    } else if (kind == tln::ModelFileKind::equivalent) {
        eq_model = tln::load_equivalent(args.model_path);
        seq_len = eq_model->input_seq_len();
        horizon = eq_model->output_seq_len();
        expect_features = eq_model->input_features();
        if (eq_model->output_features() != 1) {
            throw tln::data_error("evaluate: model predicts " +
                                  std::to_string(eq_model->output_features()) +
                                  " output features, datasets provide 1");
        }
    } else {
        flat_model = tln::load_flat(args.model_path);
        horizon = flat_model->intercept.size();
    }

    tln::PipelineConfig pcfg = pipeline_from_flags(args.data, 1, 1, file);
    if (flat_model) {
        // A flat file only records P = S*F, so S is recovered from the data's
        // feature count.
        tln::TimeSeriesFrame probe = tln::load_csv(args.data.data, args.data.timestamp_column,
                                                   args.data.target);
        if (args.data.time_features) probe = tln::add_time_features(probe);
        const std::size_t features = args.data.multivariate
                                         ? probe.column_names.size()
                                         : 1 + (args.data.time_features ? 2 : 0);
        const std::size_t p = flat_model->weights.rows();
        if (features == 0 || p % features != 0) {
            throw tln::data_error("evaluate: model has " + std::to_string(p) +
                                  " inputs, not divisible by " + std::to_string(features) +
                                  " data features");
        }
        seq_len = p / features;
        expect_features = features;
    }
    pcfg.seq_len = seq_len;
    pcfg.horizon = horizon;
    const auto data = prepare_or_retag(pcfg);
    const auto& split = pick_split(data, args.split_name);
    if (split.feature_names.size() != expect_features) {
        throw tln::data_error("evaluate: data provides " +
                              std::to_string(split.feature_names.size()) +
                              " features, model expects " + std::to_string(expect_features));
    }

    std::vector<real> targets, predictions;
    targets.reserve(split.size() * horizon);
    predictions.reserve(split.size() * horizon);
    for (std::size_t i = 0; i < split.size(); ++i) {
        const auto t = split.targets[i].data();
        targets.insert(targets.end(), t.begin(), t.end());
        if (tln_model) {
            const auto y = tln::forward(*tln_model, split.inputs[i]);
            predictions.insert(predictions.end(), y.data().begin(), y.data().end());
        } else if (eq_model) {
            const auto y = tln::linear_predict(*eq_model, split.inputs[i]);
            predictions.insert(predictions.end(), y.data().begin(), y.data().end());
        } else {
            const auto y = tln::predict_flat(*flat_model, tln::flatten_window(split.inputs[i]));
            predictions.insert(predictions.end(), y.begin(), y.end());
        }
    }

    try {
        json out{{"metric", args.metric},
                 {"split", split.split_name},
                 {"windows", split.size()},
                 {"value", args.metric == "r2" ? tln::r2_score(targets, predictions)
                                               : tln::mse(targets, predictions)}};
        if (args.per_horizon) {
            out["per_horizon"] = args.metric == "r2"
                                     ? tln::per_horizon_r2(targets, predictions, horizon)
                                     : tln::per_horizon_mse(targets, predictions, horizon);
        }
        std::cout << out.dump() << '\n';
    } catch (const tln::value_error& e) {
        std::cerr << "tln evaluate: " << e.what() << '\n';
        return 4;
    }
    return 0;
}

// -------------------------------------------------------------- extract ----

struct ExtractArgs {
    std::string model_path;
    std::string out = "equivalent.json";
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    real tolerance = tln::default_equivalence_tolerance;
};

int cmd_extract(const ExtractArgs& args) {
    const auto model = tln::load_model(args.model_path);
    const auto eq = tln::extract_equivalent(model);
    const real deviation = tln::verify_equivalence(model, eq, args.trials, args.seed);
    tln::save_equivalent(eq, args.out);
    log_info("equivalent map written to " + args.out);

    json out{{"out", args.out},
             {"deviation", deviation},
             {"tolerance", args.tolerance},
             {"trials", args.trials}};
    std::cout << out.dump() << '\n';
    if (deviation > args.tolerance) {
        std::cerr << "tln extract: deviation " << deviation << " exceeds tolerance "
                  << args.tolerance << '\n';
        return 4;
    }
    return 0;
}

// ------------------------------------------------------- export-weights ----

struct ExportArgs {
    DataFlags data;
    std::string model_kind = "tln";
    std::string model_path;
    std::string out = "weights.csv";
    std::size_t seq_len = 0;
    std::size_t horizon = 1;
    std::size_t out_position = 0;
    std::size_t out_feature = 0;
    real alpha = -1;
    real l1_ratio = 0.5;
    std::string config_path;
};

int cmd_export_weights(const ExportArgs& args) {
    if (args.model_kind == "tln") {
        if (args.model_path.empty()) {
            throw tln::config_error("export-weights: --model is required for --model-kind tln");
        }
        const auto kind = tln::peek_model_kind(args.model_path);
        tln::EquivalentLinear eq = kind == tln::ModelFileKind::equivalent
                                       ? tln::load_equivalent(args.model_path)
                                       : tln::extract_equivalent(tln::load_model(args.model_path));
        tln::export_weight_table(eq, args.out_position, args.out_feature, args.out);
        log_info("weight table written to " + args.out);
        std::cout << json{{"out", args.out}}.dump() << '\n';
        return 0;
    }

    if (args.data.data.empty() || args.data.target.empty()) {
        throw tln::config_error("export-weights: --data and --target are required for baseline kinds");
    }
    if (args.seq_len == 0) {
        throw tln::config_error("export-weights: --seq-len is required for baseline kinds");
    }
    RunFileConfig file;
    if (!args.config_path.empty()) file = load_run_config(args.config_path);
    const auto data =
        prepare_or_retag(pipeline_from_flags(args.data, args.seq_len, args.horizon, file));
    const auto problem = problem_from_dataset(data.train);

    real alpha = args.alpha;
    tln::FlatLinearModel fitted = [&] {
        if (args.model_kind == "ridge") {
            if (alpha < 0) alpha = 1.0;
            return tln::fit_ridge(problem, alpha);
        }
        if (args.model_kind == "lasso") {
            if (alpha < 0) alpha = 0.01;
            return tln::fit_lasso(problem, alpha);
        }
        if (args.model_kind == "elasticnet") {
            if (alpha < 0) alpha = 0.01;
            return tln::fit_elasticnet(problem, alpha, args.l1_ratio);
        }
        return tln::fit_ols(problem);
    }();

    const tln::EquivalentLinear eq(args.seq_len, data.train.feature_names.size(),
                                   fitted.weights,
                                   tln::SequenceTensor(args.horizon, 1, fitted.intercept));
    tln::export_weight_table(eq, args.out_position, args.out_feature, args.out,
                             data.train.feature_names);
    log_info("weight table written to " + args.out);
    std::cout << json{{"out", args.out}, {"model_kind", args.model_kind}}.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------- sweep ----

struct SweepArgs {
    std::string config_path;
    std::string data;
    std::string target;
    std::string metric;
    std::string out_csv;
    std::string out_json;
    std::size_t jobs = 0;
};

int cmd_sweep(const SweepArgs& args) {
    auto cfg = tln::load_sweep_config(args.config_path);
    if (!args.data.empty()) cfg.dataset = args.data;
    if (!args.target.empty()) cfg.target_column = args.target;
    if (!args.metric.empty()) cfg.metric = tln::sweep_metric_from_name(args.metric);
    if (args.jobs > 0) cfg.jobs = args.jobs;

    const auto report = tln::run_sweep(cfg);
    std::size_t ok = 0;
    for (const auto& row : report.rows) {
        if (row.status == tln::CellStatus::ok) ++ok;
    }
    log_info("sweep finished: " + std::to_string(ok) + "/" + std::to_string(report.rows.size()) +
             " cells ok");

    if (!args.out_csv.empty()) tln::save_sweep_report_csv(report, args.out_csv);
    if (!args.out_json.empty()) tln::save_sweep_report_json(report, args.out_json);
    if (args.out_csv.empty() && args.out_json.empty()) {
        const auto tmp = "/tmp/tln_sweep_" + std::to_string(::getpid()) + ".csv";
        tln::save_sweep_report_csv(report, tmp);
        std::ifstream in(tmp);
        std::cout << in.rdbuf();
        std::remove(tmp.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal linear network toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "fit a model and write it to disk");
    add_data_flags(train_cmd, train_args.data, true);
    train_cmd->add_option("--seq-len", train_args.seq_len, "input window length")->required();
    train_cmd->add_option("--horizon", train_args.horizon, "steps predicted ahead")->required();
    train_cmd->add_option("--model", train_args.model_kind, "architecture variant")
        ->check(CLI::IsMember({"tln", "tln-no-conv"}));
    train_cmd->add_option("--config", train_args.config_path, "JSON settings, flags win");
    train_cmd->add_option("--out", train_args.out, "model output path");
    train_cmd->add_option("--report", train_args.report_path, "training report output path");
    train_cmd->add_option("--seed", train_args.seed, "seed for init and batching");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "score a saved model on one split");
    add_data_flags(eval_cmd, eval_args.data, true);
    eval_cmd->add_option("--model", eval_args.model_path, "model file to score")->required();
    eval_cmd->add_option("--split", eval_args.split_name, "split to score")
        ->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_option("--metric", eval_args.metric, "metric to report")
        ->check(CLI::IsMember({"mse", "r2"}));
    eval_cmd->add_flag("--per-horizon", eval_args.per_horizon, "also report per-step values");
    eval_cmd->add_option("--config", eval_args.config_path, "JSON settings, flags win");

    ExtractArgs extract_args;
    auto* extract_cmd =
        app.add_subcommand("extract", "collapse a model to its equivalent linear map");
    extract_cmd->add_option("--model", extract_args.model_path, "trained model file")->required();
    extract_cmd->add_option("--out", extract_args.out, "equivalent map output path");
    extract_cmd->add_option("--trials", extract_args.trials, "random probes for verification");
    extract_cmd->add_option("--seed", extract_args.seed, "probe seed");
    extract_cmd->add_option("--tolerance", extract_args.tolerance, "max allowed deviation");

    ExportArgs export_args;
    auto* export_cmd =
        app.add_subcommand("export-weights", "write one output cell's weight table as CSV");
    add_data_flags(export_cmd, export_args.data, false);
    export_cmd->add_option("--model-kind", export_args.model_kind, "which family to export")
        ->check(CLI::IsMember({"tln", "ols", "ridge", "lasso", "elasticnet"}));
    export_cmd->add_option("--model", export_args.model_path, "saved model or equivalent file");
    export_cmd->add_option("--seq-len", export_args.seq_len, "window length for baseline fits");
    export_cmd->add_option("--horizon", export_args.horizon, "horizon for baseline fits");
    export_cmd->add_option("--out", export_args.out, "CSV output path");
    export_cmd->add_option("--out-position", export_args.out_position, "output step to export");
    export_cmd->add_option("--out-feature", export_args.out_feature, "output feature to export");
    export_cmd->add_option("--alpha", export_args.alpha, "penalty strength for baselines");
    export_cmd->add_option("--l1-ratio", export_args.l1_ratio, "elastic net mix");
    export_cmd->add_option("--config", export_args.config_path, "JSON settings, flags win");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a benchmark grid from a JSON config");
    sweep_cmd->add_option("--config", sweep_args.config_path, "sweep description")->required();
    sweep_cmd->add_option("--data", sweep_args.data, "override the config's dataset");
    sweep_cmd->add_option("--target", sweep_args.target, "override the config's target column");
    sweep_cmd->add_option("--metric", sweep_args.metric, "override the config's metric")
        ->check(CLI::IsMember({"mse", "r2"}));
    sweep_cmd->add_option("--out-csv", sweep_args.out_csv, "CSV report path");
    sweep_cmd->add_option("--out-json", sweep_args.out_json, "JSON report path");
    sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel cells");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    train_args.seed_given = train_cmd->count("--seed") > 0;

    try {
        if (app.got_subcommand(train_cmd)) return cmd_train(train_args);
        if (app.got_subcommand(eval_cmd)) return cmd_evaluate(eval_args);
        if (app.got_subcommand(extract_cmd)) return cmd_extract(extract_args);
        if (app.got_subcommand(export_cmd)) return cmd_export_weights(export_args);
        return cmd_sweep(sweep_args);
    } catch (const tln::data_error& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 3;
    } catch (const tln::io_error& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 3;
    } catch (const tln::training_error& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 4;
    } catch (const tln::singular_error& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 4;
    } catch (const tln::error& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "tln: " << e.what() << '\n';
        return 1;
    }
}
