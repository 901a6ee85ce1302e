#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tln/metrics.hpp"
#include "tln/model.hpp"
#include "tln/train.hpp"

#include "helpers.hpp"

using tln::SequenceTensor;
using tln::TlnConfig;
using tln::TlnModel;
using tln::TrainConfig;
using tln::WindowedDataset;
using tln::real;
using testutil::random_tensor;

namespace {

// Synthetic windows whose target is the mean of the input column, a map a
// single affine layer can represent exactly.
WindowedDataset mean_task(std::mt19937_64& rng, std::size_t n, std::size_t s) {
    WindowedDataset ds;
    ds.feature_names = {"value"};
    ds.seq_len = s;
    ds.horizon = 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto x = random_tensor(rng, s, 1);
        real mean = 0;
        for (std::size_t r = 0; r < s; ++r) mean += x(r, 0);
        mean /= real(s);
        ds.inputs.push_back(std::move(x));
        ds.targets.push_back(SequenceTensor(1, 1, {mean}));
    }
    return ds;
}

WindowedDataset noise_task(std::mt19937_64& rng, std::size_t n, std::size_t s) {
    WindowedDataset ds;
    ds.feature_names = {"value"};
    ds.seq_len = s;
    ds.horizon = 1;
    for (std::size_t i = 0; i < n; ++i) {
        ds.inputs.push_back(random_tensor(rng, s, 1));
        ds.targets.push_back(random_tensor(rng, 1, 1));
    }
    return ds;
}

WindowedDataset zero_target_task(std::mt19937_64& rng, std::size_t n, std::size_t s) {
    auto ds = noise_task(rng, n, s);
    for (auto& t : ds.targets) t = SequenceTensor::zeros(1, 1);
    return ds;
}

TlnModel single_layer_model(std::size_t s, std::uint64_t seed) {
    TlnConfig cfg;
    cfg.input_seq_len = s;
    cfg.input_features = 1;
    cfg.output_seq_len = 1;
    cfg.output_features = 1;
    cfg.hidden_shapes.emplace();
    cfg.use_convolution = false;
    cfg.seed = seed;
    return build_model(cfg);
}

} // namespace

TEST_CASE("train config invariants") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.learning_rate = 0;
    CHECK_THROWS_AS(cfg.validate(), tln::config_error);
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), tln::config_error);
    cfg.batch_size = 8;
    cfg.patience = cfg.max_epochs + 1;
    CHECK_THROWS_AS(cfg.validate(), tln::config_error);
}

TEST_CASE("mse_loss value and gradient") {
    const auto zero = mse_loss(SequenceTensor::from_rows({{1, 1}}),
                               SequenceTensor::from_rows({{1, 1}}));
    CHECK(zero.first == 0.0);
    CHECK(max_abs(zero.second) == 0.0);

    const auto unit = mse_loss(SequenceTensor::from_rows({{1, 1}}),
                               SequenceTensor::from_rows({{0, 0}}));
    CHECK(unit.first == 1.0);
    CHECK(unit.second == SequenceTensor::from_rows({{1, 1}}));

    const auto direct = mse_loss(SequenceTensor::from_rows({{2}, {2}, {2}}),
                                 SequenceTensor::from_rows({{1}, {2}, {3}}));
    CHECK(direct.first == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(mse_loss(SequenceTensor::zeros(1, 2), SequenceTensor::zeros(2, 1)),
                    tln::shape_error);
}

TEST_CASE("adam first step matches the hand recurrence") {
    std::vector<real> params = {0.0};
    tln::AdamState state(1);
    TrainConfig cfg;
    const std::vector<real> grads = {1.0};
    adam_step(params, grads, state, cfg);
    CHECK(params[0] == Catch::Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
    std::vector<real> params = {1.5, -2.0};
    tln::AdamState state(2);
    TrainConfig cfg;
    const std::vector<real> grads = {0.0, 0.0};
    for (int i = 0; i < 3; ++i) adam_step(params, grads, state, cfg);
    CHECK(params == std::vector<real>{1.5, -2.0});
}

TEST_CASE("adam updates blocks independently") {
    std::vector<real> params = {1.0, 1.0};
    tln::AdamState state(2);
    TrainConfig cfg;
    const std::vector<real> grads = {1.0, 0.0};
    adam_step(params, grads, state, cfg);
    CHECK(params[0] != 1.0);
    CHECK(params[1] == 1.0);
}

TEST_CASE("adam rejects non-finite gradients naming the block") {
    std::vector<real> params = {0.0, 0.0};
    tln::AdamState state(2);
    TrainConfig cfg;
    const std::vector<real> grads = {0.0, std::nan("")};
    const std::vector<tln::ParamBlock> layout = {{"layer0.base_kernel", 0, 1},
                                                 {"layer0.feature_weights", 1, 1}};
    try {
        adam_step(params, grads, state, cfg, layout);
        FAIL("expected training_error");
    } catch (const tln::training_error& e) {
        CHECK(std::string(e.what()).find("layer0.feature_weights") != std::string::npos);
    }
}

TEST_CASE("one tiny step never increases the batch loss") {
    std::mt19937_64 rng(60);
    for (int rep = 0; rep < 5; ++rep) {
        auto m = single_layer_model(4, 200 + std::uint64_t(rep));
        auto ds = noise_task(rng, 8, 4);

        auto params = pack_params(m);
        auto batch_loss = [&] {
            real acc = 0;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                acc += mse_loss(forward(m, ds.inputs[i]), ds.targets[i]).first;
            }
            return acc / real(ds.size());
        };
        const real before = batch_loss();

        std::vector<real> grad_acc(params.size(), 0);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto [loss, gout] = mse_loss(forward(m, ds.inputs[i]), ds.targets[i]);
            const auto g = pack_grads(backward(m, ds.inputs[i], gout));
            for (std::size_t j = 0; j < g.size(); ++j) grad_acc[j] += g[j];
        }
        for (auto& g : grad_acc) g /= real(ds.size());

        TrainConfig cfg;
        cfg.learning_rate = 1e-6;
        tln::AdamState state(params.size());
        adam_step(params, grad_acc, state, cfg);
        unpack_params(m, params);
        CHECK(batch_loss() <= before + 1e-12);
    }
}

TEST_CASE("evaluate_mse equals the flattened metric") {
    std::mt19937_64 rng(61);
    const auto m = single_layer_model(5, 7);
    const auto ds = noise_task(rng, 12, 5);
    std::vector<real> preds, targets;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto p = forward(m, ds.inputs[i]);
        preds.insert(preds.end(), p.data().begin(), p.data().end());
        targets.insert(targets.end(), ds.targets[i].data().begin(), ds.targets[i].data().end());
    }
    CHECK(evaluate_mse(m, ds) == tln::mse(targets, preds));
    WindowedDataset empty;
    CHECK_THROWS_AS(evaluate_mse(m, empty), tln::config_error);
}

TEST_CASE("fit learns the window mean below 1e-4 validation mse") {
    std::mt19937_64 rng(62);
    const auto train = mean_task(rng, 400, 10);
    const auto val = mean_task(rng, 100, 10);
    const auto m = single_layer_model(10, 3);

    TrainConfig cfg;
    cfg.learning_rate = 0.02;
    cfg.batch_size = 64;
    cfg.max_epochs = 400;
    cfg.patience = 50;
    cfg.seed = 5;
    const auto [fitted, report] = fit(m, train, val, cfg);
    CHECK(report.best_val_loss < 1e-4);
    CHECK(evaluate_mse(fitted, val) == report.best_val_loss);
    CHECK(report.best_epoch >= 1);
    CHECK(report.best_epoch <= report.epochs_run());
    CHECK(report.wall_seconds >= 0.0);
    CHECK(!report.snapshot_id.empty());
    for (const real p : pack_params(fitted)) CHECK(std::isfinite(p));
}

TEST_CASE("zero targets drive the loss toward zero") {
    std::mt19937_64 rng(63);
    const auto train = zero_target_task(rng, 64, 4);
    const auto val = zero_target_task(rng, 16, 4);
    const auto m = single_layer_model(4, 9);

    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 64;
    cfg.max_epochs = 60;
    cfg.patience = 60;
    const auto [fitted, report] = fit(m, train, val, cfg);
    REQUIRE(report.epochs_run() == 60);
    // The optimizer's normalized steps wobble near the optimum, so only the
    // early descent and the overall drop are checked, not per-epoch decrease.
    for (std::size_t e = 1; e < 10; ++e) {
        CHECK(report.train_loss[e] <= report.train_loss[e - 1] + 1e-6);
    }
    CHECK(report.best_val_loss < 1e-3);
    CHECK(report.best_val_loss < report.train_loss.front() / 10);
}

TEST_CASE("fit is deterministic for a fixed seed") {
    std::mt19937_64 rng(64);
    const auto train = mean_task(rng, 60, 5);
    const auto val = mean_task(rng, 20, 5);
    const auto m = single_layer_model(5, 11);
    TrainConfig cfg;
    cfg.max_epochs = 10;
    cfg.patience = 10;
    cfg.seed = 42;
    const auto [m1, r1] = fit(m, train, val, cfg);
    const auto [m2, r2] = fit(m, train, val, cfg);
    CHECK(r1.train_loss == r2.train_loss);
    CHECK(r1.val_loss == r2.val_loss);
    CHECK(r1.snapshot_id == r2.snapshot_id);
    CHECK(r1.best_epoch == r2.best_epoch);
}

TEST_CASE("early stopping halts patience epochs after the best") {
    std::mt19937_64 rng(65);
    const auto train = noise_task(rng, 64, 4);
    const auto val = noise_task(rng, 32, 4);
    const auto m = single_layer_model(4, 13);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.max_epochs = 200;
    cfg.patience = 5;
    const auto [fitted, report] = fit(m, train, val, cfg);
    REQUIRE(report.epochs_run() < 200);
    CHECK(report.epochs_run() == report.best_epoch + 5);
    real best = report.val_loss.front();
    for (const real v : report.val_loss) best = std::min(best, v);
    CHECK(report.best_val_loss == best);
    CHECK(evaluate_mse(fitted, val) == report.best_val_loss);
}

TEST_CASE("divergence raises a training error with the epoch") {
    std::mt19937_64 rng(66);
    const auto train = noise_task(rng, 16, 3);
    const auto val = noise_task(rng, 8, 3);
    const auto m = single_layer_model(3, 17);
    TrainConfig cfg;
    cfg.learning_rate = 1e200;
    cfg.max_epochs = 10;
    cfg.patience = 10;
    try {
        fit(m, train, val, cfg);
        FAIL("expected training_error");
    } catch (const tln::training_error& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("fit validates datasets against the model") {
    std::mt19937_64 rng(67);
    const auto m = single_layer_model(4, 19);
    const auto good = noise_task(rng, 8, 4);
    const auto bad = noise_task(rng, 8, 5);
    TrainConfig cfg;
    CHECK_THROWS_AS(fit(m, bad, good, cfg), tln::config_error);
    CHECK_THROWS_AS(fit(m, good, bad, cfg), tln::config_error);
    WindowedDataset empty;
    CHECK_THROWS_AS(fit(m, empty, good, cfg), tln::config_error);
}

TEST_CASE("wall clock grows with epochs run") {
    std::mt19937_64 rng(68);
    const auto train = mean_task(rng, 200, 6);
    const auto val = mean_task(rng, 50, 6);
    const auto m = single_layer_model(6, 23);
    TrainConfig one;
    one.max_epochs = 1;
    one.patience = 1;
    TrainConfig many;
    many.max_epochs = 40;
    many.patience = 40;
    const auto [m1, r1] = fit(m, train, val, one);
    const auto [m2, r2] = fit(m, train, val, many);
    CHECK(r1.wall_seconds >= 0.0);
    CHECK(r2.wall_seconds >= r1.wall_seconds);
}

TEST_CASE("gradient_check on a random two-layer model") {
    TlnConfig cfg;
    cfg.input_seq_len = 4;
    cfg.input_features = 2;
    cfg.output_seq_len = 2;
    cfg.output_features = 1;
    cfg.hidden_shapes = std::vector<tln::LayerShape>{{3, 2}};
    cfg.use_convolution = true;
    cfg.seed = 29;
    auto m = build_model(cfg);
    std::mt19937_64 rng(69);
    auto params = testutil::random_vector(rng, pack_params(m).size());
    unpack_params(m, params);
    const auto x = random_tensor(rng, 4, 2);
    const auto target = random_tensor(rng, 2, 1);
    CHECK(gradient_check(m, x, target, 1e-6) < 1e-5);
}

TEST_CASE("gradient_check is zero at a zero-loss point") {
    auto m = single_layer_model(3, 31);
    std::vector<real> zeros(pack_params(m).size(), 0);
    unpack_params(m, zeros);
    std::mt19937_64 rng(70);
    const auto x = random_tensor(rng, 3, 1);
    CHECK(gradient_check(m, x, SequenceTensor::zeros(1, 1)) == 0.0);
    CHECK_THROWS_AS(gradient_check(m, x, SequenceTensor::zeros(1, 1), 0.0), tln::config_error);
}
