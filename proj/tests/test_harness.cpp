#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tln/harness.hpp"

using tln::CellStatus;
using tln::SweepConfig;
using tln::SweepMetric;
using tln::SweepModel;
using tln::SweepReport;
using tln::SweepRow;
using tln::real;

namespace {

std::string fixture(const char* name) {
    return std::string(TLN_FIXTURE_DIR) + "/" + name;
}

std::string temp_path(const char* stem) {
    const char* dir = std::getenv("TMPDIR");
    return std::string(dir ? dir : "/tmp") + "/" + stem;
}

SweepConfig sine_config() {
    SweepConfig cfg;
    cfg.dataset = fixture("sine.csv");
    cfg.target_column = "value";
    cfg.train.max_epochs = 3;
    cfg.train.patience = 3;
    cfg.train.batch_size = 32;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_temp_json(const char* stem, const std::string& body) {
    const auto path = temp_path(stem);
    std::ofstream(path) << body;
    return path;
}

} // namespace

TEST_CASE("model and metric names round-trip") {
    using tln::sweep_model_from_name;
    using tln::sweep_model_name;
    for (const auto m : {SweepModel::tln, SweepModel::tln_no_conv, SweepModel::ols,
                         SweepModel::ridge, SweepModel::lasso, SweepModel::elasticnet}) {
        CHECK(sweep_model_from_name(sweep_model_name(m)) == m);
    }
    CHECK_THROWS_AS(sweep_model_from_name("arima"), tln::parse_error);
    CHECK(tln::sweep_metric_name(SweepMetric::r2) == "r2");
    CHECK(tln::sweep_metric_from_name("mse") == SweepMetric::mse);
    CHECK_THROWS_AS(tln::sweep_metric_from_name("mae"), tln::parse_error);
}

TEST_CASE("sweep config validation") {
    auto cfg = sine_config();
    cfg.target_column = "value";
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.dataset.clear();
    CHECK_THROWS_AS(bad.validate(), tln::config_error);

    bad = cfg;
    bad.target_column.clear();
    CHECK_THROWS_AS(bad.validate(), tln::config_error);

    bad = cfg;
    bad.seq_lens.clear();
    CHECK_THROWS_AS(bad.validate(), tln::config_error);

    bad = cfg;
    bad.horizons = {0};
    CHECK_THROWS_AS(bad.validate(), tln::config_error);

    bad = cfg;
    bad.jobs = 0;
    CHECK_THROWS_AS(bad.validate(), tln::config_error);
}

TEST_CASE("single ols cell produces one finished row") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::ols};
    cfg.seq_lens = {5};
    cfg.horizons = {2};
    cfg.metric = SweepMetric::mse;
    const auto report = run_sweep(cfg);
    REQUIRE(report.rows.size() == 1);
    const auto& row = report.rows[0];
    CHECK(row.model == SweepModel::ols);
    CHECK(row.seq_len == 5);
    CHECK(row.horizon == 2);
    CHECK(row.seed == 0);
    CHECK(row.status == CellStatus::ok);
    CHECK(row.metric == SweepMetric::mse);
    REQUIRE(std::isfinite(row.metric_value));
    CHECK(row.metric_value >= 0.0);
    CHECK(row.param_count == 5 * 2 + 2);
    CHECK(row.train_seconds >= 0.0);
    CHECK(row.reason.empty());
}

TEST_CASE("grid covers every combination once, sorted") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::tln_no_conv, SweepModel::ols};
    cfg.seq_lens = {4, 6};
    cfg.horizons = {1, 2};
    cfg.seeds = {0, 1};
    const auto report = run_sweep(cfg);
    REQUIRE(report.rows.size() == 16);

    std::set<std::array<std::uint64_t, 4>> seen;
    for (const auto& row : report.rows) {
        seen.insert({static_cast<std::uint64_t>(row.model), row.seq_len, row.horizon, row.seed});
        CHECK(row.status == CellStatus::ok);
    }
    CHECK(seen.size() == 16);

    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const auto& a = report.rows[i - 1];
        const auto& b = report.rows[i];
        const auto ka = std::array<std::uint64_t, 4>{static_cast<std::uint64_t>(a.model),
                                                     a.seq_len, a.horizon, a.seed};
        const auto kb = std::array<std::uint64_t, 4>{static_cast<std::uint64_t>(b.model),
                                                     b.seq_len, b.horizon, b.seed};
        CHECK(ka < kb);
    }
}

TEST_CASE("seeds vary trained models but not closed-form fits") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::tln_no_conv, SweepModel::ridge};
    cfg.seq_lens = {4};
    cfg.horizons = {1};
    cfg.seeds = {1, 2};
    const auto report = run_sweep(cfg);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].model == SweepModel::tln_no_conv);
    CHECK(report.rows[2].model == SweepModel::ridge);
    CHECK(report.rows[0].metric_value != report.rows[1].metric_value);
    CHECK(report.rows[2].metric_value == report.rows[3].metric_value);
}

TEST_CASE("repeated runs give identical metrics") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::tln_no_conv, SweepModel::lasso};
    cfg.seq_lens = {4};
    cfg.horizons = {1, 3};
    cfg.seeds = {7};
    const auto a = run_sweep(cfg);
    const auto b = run_sweep(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].model == b.rows[i].model);
        CHECK(a.rows[i].seq_len == b.rows[i].seq_len);
        CHECK(a.rows[i].horizon == b.rows[i].horizon);
        CHECK(a.rows[i].status == b.rows[i].status);
        CHECK(a.rows[i].metric_value == b.rows[i].metric_value);
        CHECK(a.rows[i].param_count == b.rows[i].param_count);
    }
}

TEST_CASE("parallel runs match the serial ordering") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::tln_no_conv, SweepModel::ridge};
    cfg.seq_lens = {4, 5};
    cfg.horizons = {1};
    cfg.seeds = {0, 3};
    const auto serial = run_sweep(cfg);
    cfg.jobs = 3;
    const auto parallel = run_sweep(cfg);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].model == parallel.rows[i].model);
        CHECK(serial.rows[i].seq_len == parallel.rows[i].seq_len);
        CHECK(serial.rows[i].metric_value == parallel.rows[i].metric_value);
    }
}

TEST_CASE("ols reports insufficient samples while ridge proceeds") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::ols, SweepModel::ridge};
    cfg.seq_lens = {20};
    cfg.horizons = {1};
    cfg.split = {0.15, 0.4, 0.45};
    const auto report = run_sweep(cfg);
    REQUIRE(report.rows.size() == 2);
    const auto& ols_row = report.rows[0];
    CHECK(ols_row.model == SweepModel::ols);
    CHECK(ols_row.status == CellStatus::insufficient_samples);
    CHECK(std::isnan(ols_row.metric_value));
    CHECK(ols_row.reason.find("training windows") != std::string::npos);
    const auto& ridge_row = report.rows[1];
    CHECK(ridge_row.model == SweepModel::ridge);
    CHECK(ridge_row.status == CellStatus::ok);
    CHECK(std::isfinite(ridge_row.metric_value));
}

TEST_CASE("cells too long for a split fail with a reason") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::ols};
    cfg.seq_lens = {25};
    cfg.horizons = {2};
    const auto report = run_sweep(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].status == CellStatus::failed);
    CHECK(std::isnan(report.rows[0].metric_value));
    CHECK(!report.rows[0].reason.empty());
}

TEST_CASE("dataset problems abort the whole sweep") {
    auto cfg = sine_config();
    cfg.models = {SweepModel::ols};
    cfg.seq_lens = {4};
    cfg.horizons = {1};
    cfg.dataset = fixture("dup_timestamp.csv");
    cfg.target_column = "value";
    CHECK_THROWS_AS(run_sweep(cfg), tln::data_error);

    cfg.dataset = fixture("sine.csv");
    cfg.target_column = "watts";
    CHECK_THROWS_AS(run_sweep(cfg), tln::data_error);
}

TEST_CASE("sweep config loads from json") {
    const auto path = write_temp_json("tln_sweep_cfg.json", R"({
        "dataset": "series.csv",
        "target_column": "OT",
        "seq_lens": [4, 8],
        "horizons": [2],
        "models": ["tln", "ridge"],
        "multivariate": true,
        "time_features": true,
        "metric": "mse",
        "seeds": [3, 4],
        "scaler": "minmax",
        "split": [0.6, 0.2, 0.2],
        "ridge_alpha": 2.5,
        "train": {"learning_rate": 0.01, "max_epochs": 7},
        "jobs": 2
    })");
    const auto cfg = tln::load_sweep_config(path);
    CHECK(cfg.dataset == "series.csv");
    CHECK(cfg.target_column == "OT");
    CHECK(cfg.seq_lens == std::vector<std::size_t>{4, 8});
    CHECK(cfg.horizons == std::vector<std::size_t>{2});
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[0] == SweepModel::tln);
    CHECK(cfg.models[1] == SweepModel::ridge);
    CHECK(cfg.multivariate);
    CHECK(cfg.time_features);
    CHECK(cfg.metric == SweepMetric::mse);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.scaler == tln::ScalerKind::minmax);
    CHECK(cfg.split[0] == 0.6);
    CHECK(cfg.ridge_alpha == 2.5);
    CHECK(cfg.train.learning_rate == 0.01);
    CHECK(cfg.train.max_epochs == 7);
    CHECK(cfg.train.batch_size == 128);
    CHECK(cfg.jobs == 2);
    std::remove(path.c_str());
}

TEST_CASE("sweep config rejects unknown keys") {
    const auto path = write_temp_json("tln_sweep_bad.json", R"({"dataset": "x", "verbose": true})");
    try {
        tln::load_sweep_config(path);
        FAIL("expected parse_error");
    } catch (const tln::parse_error& e) {
        CHECK(std::string(e.what()).find("'verbose'") != std::string::npos);
    }
    std::remove(path.c_str());

    const auto nested = write_temp_json("tln_sweep_bad2.json", R"({"train": {"seed": 5}})");
    try {
        tln::load_sweep_config(nested);
        FAIL("expected parse_error");
    } catch (const tln::parse_error& e) {
        CHECK(std::string(e.what()).find("train.seed") != std::string::npos);
    }
    std::remove(nested.c_str());
}

TEST_CASE("sweep config rejects malformed input") {
    const auto path = write_temp_json("tln_sweep_trunc.json", R"({"dataset": )");
    try {
        tln::load_sweep_config(path);
        FAIL("expected parse_error");
    } catch (const tln::parse_error& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
    std::remove(path.c_str());

    const auto two = write_temp_json("tln_sweep_split.json", R"({"split": [0.8, 0.2]})");
    CHECK_THROWS_AS(tln::load_sweep_config(two), tln::parse_error);
    std::remove(two.c_str());

    const auto model = write_temp_json("tln_sweep_model.json", R"({"models": ["prophet"]})");
    CHECK_THROWS_AS(tln::load_sweep_config(model), tln::parse_error);
    std::remove(model.c_str());

    CHECK_THROWS_AS(tln::load_sweep_config("/nonexistent/sweep.json"), tln::io_error);
}

TEST_CASE("sweep report writers") {
    SweepReport report;
    SweepRow ok;
    ok.model = SweepModel::ols;
    ok.seq_len = 5;
    ok.horizon = 2;
    ok.seed = 0;
    ok.status = CellStatus::ok;
    ok.metric = SweepMetric::mse;
    ok.metric_value = 0.25;
    ok.param_count = 12;
    ok.train_seconds = 0.1234;
    SweepRow bad;
    bad.model = SweepModel::ridge;
    bad.seq_len = 9;
    bad.horizon = 1;
    bad.seed = 4;
    bad.status = CellStatus::failed;
    bad.metric = SweepMetric::mse;
    bad.reason = "frame too short, need 10";
    report.rows = {ok, bad};

    const auto cpath = temp_path("tln_sweep_report.csv");
    tln::save_sweep_report_csv(report, cpath);
    std::ifstream in(cpath);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "model,seq_len,horizon,multivariate,time_features,seed,status,metric,"
          "metric_value,param_count,train_seconds,reason");
    std::getline(in, line);
    CHECK(line == "ols,5,2,0,0,0,ok,mse,0.25,12,0.123400,");
    std::getline(in, line);
    CHECK(line == "ridge,9,1,0,0,4,failed,mse,,0,0.000000,\"frame too short, need 10\"");
    CHECK(!std::getline(in, line));
    std::remove(cpath.c_str());

    const auto jpath = temp_path("tln_sweep_report.json");
    tln::save_sweep_report_json(report, jpath);
    const auto j = nlohmann::json::parse(slurp(jpath));
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("metric_value").get<real>() == 0.25);
    CHECK(j.at("rows")[1].at("metric_value").is_null());
    CHECK(j.at("rows")[1].at("reason").get<std::string>() == "frame too short, need 10");
    std::remove(jpath.c_str());
}
