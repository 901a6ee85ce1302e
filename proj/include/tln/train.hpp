#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tln/data.hpp"
#include "tln/model.hpp"

namespace tln {

struct TrainConfig {
    real learning_rate = 1e-3;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 100;
    std::size_t patience = 10; // epochs without validation improvement before stopping
    real adam_beta1 = 0.9;
    real adam_beta2 = 0.999;
    real adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0)) throw config_error("TrainConfig: learning_rate must be > 0");
        if (batch_size < 1) throw config_error("TrainConfig: batch_size must be >= 1");
        if (patience > max_epochs) {
            throw config_error("TrainConfig: patience exceeds max_epochs");
        }
    }
};

struct TrainReport {
    std::vector<real> train_loss; // one entry per epoch run
    std::vector<real> val_loss;
    std::size_t best_epoch = 0; // 1-based
    real best_val_loss = std::numeric_limits<real>::infinity();
    double wall_seconds = 0;
    std::string snapshot_id; // content hash of the returned parameters

    std::size_t epochs_run() const { return train_loss.size(); }
};

inline std::pair<real, SequenceTensor> mse_loss(const SequenceTensor& pred,
                                                const SequenceTensor& target) {
    if (!pred.same_shape(target)) {
        throw shape_error("mse_loss: shapes differ, " + pred.shape_string() + " vs " +
                          target.shape_string());
    }
    const real n = real(pred.size());
    real loss = 0;
    std::vector<real> g(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const real d = pred.data()[i] - target.data()[i];
        loss += d * d;
        g[i] = 2 * d / n;
    }
    return {loss / n, SequenceTensor(pred.rows(), pred.cols(), std::move(g))};
}

struct AdamState {
    std::vector<real> m;
    std::vector<real> v;
    std::size_t step = 0;

    explicit AdamState(std::size_t n) : m(n, 0), v(n, 0) {}
};

/// One bias-corrected Adam update, in place. The optional layout is used to
/// name the offending block when a gradient is non-finite.
inline void adam_step(std::vector<real>& params, std::span<const real> grads, AdamState& state,
                      const TrainConfig& cfg, std::span<const ParamBlock> layout = {}) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw shape_error("adam_step: params/grads/state sizes differ");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            std::string where = "index " + std::to_string(i);
            for (const auto& b : layout) {
                if (i >= b.offset && i < b.offset + b.size) {
                    where = "block '" + b.name + "'";
                    break;
                }
            }
            throw training_error("adam_step: non-finite gradient in " + where);
        }
    }
    state.step += 1;
    const real b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const real bc1 = 1 - std::pow(b1, real(state.step));
    const real bc2 = 1 - std::pow(b2, real(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1 - b2) * grads[i] * grads[i];
        const real mhat = state.m[i] / bc1;
        const real vhat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    }
}

/// Squared error over the whole dataset, accumulated in sample order with a
/// single divide, so any other code path that flattens predictions the same
/// way reproduces it bit for bit.
inline real evaluate_mse(const TlnModel& m, const WindowedDataset& ds) {
    if (ds.size() == 0) throw config_error("evaluate_mse: empty dataset");
    real acc = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto pred = forward(m, ds.inputs[i]);
        if (!pred.same_shape(ds.targets[i])) {
            throw shape_error("evaluate_mse: prediction " + pred.shape_string() +
                              " vs target " + ds.targets[i].shape_string());
        }
        for (std::size_t e = 0; e < pred.size(); ++e) {
            const real d = pred.data()[e] - ds.targets[i].data()[e];
            acc += d * d;
        }
        n += pred.size();
    }
    return acc / real(n);
}

namespace detail {

inline void check_dataset_against_model(const TlnModel& m, const WindowedDataset& ds,
                                        const std::string& name) {
    if (ds.size() == 0) throw config_error("fit: " + name + " dataset is empty");
    const auto& x = ds.inputs.front();
    if (x.rows() != m.config.input_seq_len || x.cols() != m.config.input_features) {
        throw config_error("fit: " + name + " inputs are " + x.shape_string() +
                           ", model expects " + std::to_string(m.config.input_seq_len) + "x" +
                           std::to_string(m.config.input_features));
    }
    const auto& y = ds.targets.front();
    if (y.rows() != m.config.output_seq_len || y.cols() != m.config.output_features) {
        throw config_error("fit: " + name + " targets are " + y.shape_string() +
                           ", model predicts " + std::to_string(m.config.output_seq_len) + "x" +
                           std::to_string(m.config.output_features));
    }
}

inline std::string snapshot_hash(std::span<const real> params) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a over the raw bytes
    for (const real v : params) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
        for (std::size_t b = 0; b < sizeof(real); ++b) {
            h ^= bytes[b];
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

/// Mini-batch Adam training with early stopping on validation loss and
/// restore-best-weights. Deterministic for a fixed seed.
inline std::pair<TlnModel, TrainReport> fit(const TlnModel& model, const WindowedDataset& train,
                                            const WindowedDataset& val, const TrainConfig& cfg) {
    cfg.validate();
    detail::check_dataset_against_model(model, train, "train");
    detail::check_dataset_against_model(model, val, "validation");

    const auto started = std::chrono::steady_clock::now();
    TlnModel work = model;
    auto params = pack_params(work);
    const auto layout = param_layout(work);
    AdamState opt(params.size());
    std::mt19937_64 shuffle_rng(cfg.seed);

    const std::size_t n = train.size();
    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t batches_per_epoch = n / batch;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    std::vector<real> best_params = params;
    std::size_t epochs_since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        try {
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            real epoch_loss = 0;
            for (std::size_t b = 0; b < batches_per_epoch; ++b) {
                std::vector<real> grad_acc(params.size(), 0);
                real batch_loss = 0;
                for (std::size_t s = 0; s < batch; ++s) {
                    const std::size_t idx = order[b * batch + s];
                    const auto& x = train.inputs[idx];
                    const auto pred = forward(work, x);
                    auto [loss, grad_out] = mse_loss(pred, train.targets[idx]);
                    batch_loss += loss;
                    const auto grads = pack_grads(backward(work, x, grad_out));
                    for (std::size_t i = 0; i < grad_acc.size(); ++i) grad_acc[i] += grads[i];
                }
                batch_loss /= real(batch);
                for (auto& g : grad_acc) g /= real(batch);
                if (!std::isfinite(batch_loss)) {
                    throw value_error("batch loss is not finite");
                }
                adam_step(params, grad_acc, opt, cfg, layout);
                unpack_params(work, params);
                epoch_loss += batch_loss;
            }
            report.train_loss.push_back(epoch_loss / real(batches_per_epoch));
            const real vloss = evaluate_mse(work, val);
            report.val_loss.push_back(vloss);
            if (vloss < report.best_val_loss) {
                report.best_val_loss = vloss;
                report.best_epoch = epoch;
                best_params = params;
                epochs_since_best = 0;
            } else {
                ++epochs_since_best;
            }
            if (epochs_since_best >= cfg.patience) break;
        } catch (const value_error& e) {
            throw training_error("fit: diverged at epoch " + std::to_string(epoch) + ": " +
                                 e.what());
        } catch (const training_error& e) {
            throw training_error("fit: diverged at epoch " + std::to_string(epoch) + ": " +
                                 e.what());
        }
    }

    unpack_params(work, best_params);
    report.snapshot_id = detail::snapshot_hash(best_params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(work), std::move(report)};
}

/// Compares every parameter's backprop gradient of the squared-error loss on
/// one sample against central finite differences. Returns the worst relative
/// error |a - n| / max(|a| + |n|, 1).
inline real gradient_check(const TlnModel& model, const SequenceTensor& x,
                           const SequenceTensor& target, real step = 1e-6) {
    if (!(step > 0)) throw config_error("gradient_check: step must be > 0");
    TlnModel work = model;
    auto params = pack_params(work);

    const auto [loss, grad_out] = mse_loss(forward(work, x), target);
    const auto analytic = pack_grads(backward(work, x, grad_out));

    real worst = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const real saved = params[i];
        params[i] = saved + step;
        unpack_params(work, params);
        const real up = mse_loss(forward(work, x), target).first;
        params[i] = saved - step;
        unpack_params(work, params);
        const real down = mse_loss(forward(work, x), target).first;
        params[i] = saved;
        const real numeric = (up - down) / (2 * step);
        const real denom = std::max(std::abs(analytic[i]) + std::abs(numeric), real(1));
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    unpack_params(work, params);
    return worst;
}

} // namespace tln
