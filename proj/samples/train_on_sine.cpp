// End-to-end run on a synthetic hourly series: generate a CSV, train a small
// network, score it on the held-out split, and dump the weight table feeding
// the first forecast step.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tln/data.hpp"
#include "tln/equivalence.hpp"
#include "tln/metrics.hpp"
#include "tln/train.hpp"

using namespace tln;

int main() {
    const std::string csv = "/tmp/tln_sample_sine.csv";
    {
        std::ofstream out(csv);
        out << "date,value\n";
        for (int i = 0; i < 400; ++i) {
            char ts[32];
            std::snprintf(ts, sizeof(ts), "2020-01-%02d %02d:00:00", 1 + i / 24, i % 24);
            out << ts << ',' << std::sin(2 * 3.14159265358979 * i / 24.0) + 0.001 * i << '\n';
        }
    }

    PipelineConfig pcfg;
    pcfg.csv_path = csv;
    pcfg.target_column = "value";
    pcfg.seq_len = 24;
    pcfg.horizon = 6;
    const auto data = prepare_datasets(pcfg);
    std::printf("windows: %zu train, %zu val, %zu test\n", data.train.size(), data.val.size(),
                data.test.size());

    TlnConfig mc;
    mc.input_seq_len = pcfg.seq_len;
    mc.input_features = 1;
    mc.output_seq_len = pcfg.horizon;
    mc.output_features = 1;

    TrainConfig tc;
    tc.learning_rate = 5e-3;
    tc.max_epochs = 300;
    tc.patience = 30;
    auto [model, report] = fit(build_model(mc), data.train, data.val, tc);
    std::printf("trained %zu epochs, best val mse %.5f at epoch %zu\n", report.epochs_run(),
                double(report.best_val_loss), report.best_epoch);

    std::vector<real> targets, predictions;
    for (std::size_t i = 0; i < data.test.size(); ++i) {
        const auto t = data.test.targets[i].data();
        targets.insert(targets.end(), t.begin(), t.end());
        const auto y = forward(model, data.test.inputs[i]);
        predictions.insert(predictions.end(), y.data().begin(), y.data().end());
    }
    std::printf("test mse %.5f, test r2 %.4f\n", double(mse(targets, predictions)),
                double(r2_score(targets, predictions)));

    const auto eq = extract_equivalent(model);
    const std::string table = "/tmp/tln_sample_weights.csv";
    export_weight_table(eq, 0, 0, table, data.test.feature_names);
    std::printf("weight table for forecast step 1 written to %s\n", table.c_str());
    return 0;
}
