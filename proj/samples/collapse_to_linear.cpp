// Builds a three-layer network, collapses it to its single affine map, and
// shows that both produce the same forecasts.

#include <cstdio>
#include <random>

#include "tln/equivalence.hpp"
#include "tln/model.hpp"

using namespace tln;

int main() {
    TlnConfig cfg;
    cfg.input_seq_len = 12;
    cfg.input_features = 2;
    cfg.output_seq_len = 4;
    cfg.output_features = 1;
    cfg.seed = 42;

    auto model = build_model(cfg);
    auto params = pack_params(model);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<real> u(-0.5, 0.5);
    for (auto& p : params) p = u(rng);
    unpack_params(model, params);

    const auto eq = extract_equivalent(model);
    const real deviation = verify_equivalence(model, eq, 200, 0);
    std::printf("layers: %zu, parameters: %zu\n", model.layers.size(), param_count(model));
    std::printf("equivalent map: %zux%zu weights, worst deviation %.3g\n",
                eq.weights().rows(), eq.weights().cols(), double(deviation));

    std::vector<real> probe(cfg.input_seq_len * cfg.input_features);
    for (auto& v : probe) v = u(rng);
    const SequenceTensor x(cfg.input_seq_len, cfg.input_features, probe);
    const auto net_out = forward(model, x);
    const auto map_out = linear_predict(eq, x);
    for (std::size_t t = 0; t < net_out.rows(); ++t) {
        std::printf("step %zu: network %+.6f, collapsed %+.6f\n", t + 1,
                    double(net_out(t, 0)), double(map_out(t, 0)));
    }
    return 0;
}
