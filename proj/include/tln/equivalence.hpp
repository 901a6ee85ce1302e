#pragma once

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tln/model.hpp"
#include "tln/tensor.hpp"

namespace tln {

#ifdef TLN_SINGLE_PRECISION
inline constexpr real default_equivalence_tolerance = 1e-4;
#else
inline constexpr real default_equivalence_tolerance = 1e-9;
#endif

/// The single affine map equal to a whole TLN: weights indexed by
/// (input position i, input feature j, output position, output feature),
/// stored as an (S*F) x (S'*F') matrix with row i*F + j and column
/// so*F' + fo, plus the bias grid.
class EquivalentLinear {
  public:
    EquivalentLinear(std::size_t s_in, std::size_t f_in, SequenceTensor weights,
                     SequenceTensor bias)
        : s_in_(s_in), f_in_(f_in), weights_(std::move(weights)), bias_(std::move(bias)) {
        if (weights_.rows() != s_in_ * f_in_ ||
            weights_.cols() != bias_.rows() * bias_.cols()) {
            throw shape_error("EquivalentLinear: weights " + weights_.shape_string() +
                              " inconsistent with input " + std::to_string(s_in_) + "x" +
                              std::to_string(f_in_) + " and bias " + bias_.shape_string());
        }
    }

    std::size_t input_seq_len() const { return s_in_; }
    std::size_t input_features() const { return f_in_; }
    std::size_t output_seq_len() const { return bias_.rows(); }
    std::size_t output_features() const { return bias_.cols(); }

    const SequenceTensor& weights() const { return weights_; }
    const SequenceTensor& bias() const { return bias_; }

    real weight(std::size_t i, std::size_t j, std::size_t so, std::size_t fo) const {
        return weights_(i * f_in_ + j, so * bias_.cols() + fo);
    }

    friend bool operator==(const EquivalentLinear& a, const EquivalentLinear& b) {
        return a.s_in_ == b.s_in_ && a.f_in_ == b.f_in_ && a.weights_ == b.weights_ &&
               a.bias_ == b.bias_;
    }

  private:
    std::size_t s_in_;
    std::size_t f_in_;
    SequenceTensor weights_; // (S*F) x (S'*F')
    SequenceTensor bias_;    // S' x F'
};

/// Probes the model with the zero input and every unit vector e_ij:
/// bias = forward(0), column (i,j) of the weights = forward(e_ij) - bias.
/// S*F + 1 forward passes in total.
inline EquivalentLinear extract_equivalent(const TlnModel& m) {
    const std::size_t s = m.config.input_seq_len, f = m.config.input_features;
    const auto bias = forward(m, SequenceTensor::zeros(s, f));
    const std::size_t out_size = bias.size();
    std::vector<real> w(s * f * out_size);
    std::vector<real> probe(s * f, 0);
    for (std::size_t ij = 0; ij < s * f; ++ij) {
        probe[ij] = 1;
        const auto y = forward(m, SequenceTensor(s, f, probe));
        probe[ij] = 0;
        for (std::size_t k = 0; k < out_size; ++k) {
            w[ij * out_size + k] = y.data()[k] - bias.data()[k];
        }
    }
    return EquivalentLinear(s, f, SequenceTensor(s * f, out_size, std::move(w)), bias);
}

inline SequenceTensor linear_predict(const EquivalentLinear& eq, const SequenceTensor& x) {
    if (x.rows() != eq.input_seq_len() || x.cols() != eq.input_features()) {
        throw shape_error("linear_predict: input " + x.shape_string() + " does not match " +
                          std::to_string(eq.input_seq_len()) + "x" +
                          std::to_string(eq.input_features()));
    }
    const std::size_t out_size = eq.bias().size();
    std::vector<real> y(eq.bias().data().begin(), eq.bias().data().end());
    for (std::size_t ij = 0; ij < x.size(); ++ij) {
        const real v = x.data()[ij];
        for (std::size_t k = 0; k < out_size; ++k) y[k] += eq.weights()(ij, k) * v;
    }
    return SequenceTensor(eq.output_seq_len(), eq.output_features(), std::move(y));
}

/// Reports (never asserts) the worst absolute deviation between the model and
/// its extracted map over seeded random inputs in [-1, 1].
inline real verify_equivalence(const TlnModel& m, const EquivalentLinear& eq, std::size_t trials,
                               std::uint64_t seed) {
    if (trials < 1) throw config_error("verify_equivalence: trials must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<real> dist(-1.0, 1.0);
    const std::size_t s = m.config.input_seq_len, f = m.config.input_features;
    real worst = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<real> d(s * f);
        for (auto& v : d) v = dist(rng);
        const SequenceTensor x(s, f, std::move(d));
        worst = std::max(worst, max_abs_diff(forward(m, x), linear_predict(eq, x)));
    }
    return worst;
}

namespace detail {

inline std::string format_real(real v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", double(v));
    return buf;
}

} // namespace detail

/// Writes the S x F weight slice feeding one output cell as CSV: header row
/// of feature names, then one row per input position with its lag in the
/// first column (lag 1 = most recent position).
inline void export_weight_table(const EquivalentLinear& eq, std::size_t out_position,
                                std::size_t out_feature, const std::string& path,
                                const std::vector<std::string>& feature_names = {}) {
    if (out_position >= eq.output_seq_len() || out_feature >= eq.output_features()) {
        throw range_error("export_weight_table: output index (" + std::to_string(out_position) +
                          "," + std::to_string(out_feature) + ") out of range for " +
                          std::to_string(eq.output_seq_len()) + "x" +
                          std::to_string(eq.output_features()));
    }
    if (!feature_names.empty() && feature_names.size() != eq.input_features()) {
        throw shape_error("export_weight_table: " + std::to_string(feature_names.size()) +
                          " names for " + std::to_string(eq.input_features()) + " features");
    }
    std::ofstream out(path);
    if (!out) throw io_error("export_weight_table: cannot open " + path);
    out << "lag";
    for (std::size_t j = 0; j < eq.input_features(); ++j) {
        out << ',' << (feature_names.empty() ? "f" + std::to_string(j) : feature_names[j]);
    }
    out << '\n';
    for (std::size_t i = 0; i < eq.input_seq_len(); ++i) {
        out << (eq.input_seq_len() - i);
        for (std::size_t j = 0; j < eq.input_features(); ++j) {
            out << ',' << detail::format_real(eq.weight(i, j, out_position, out_feature));
        }
        out << '\n';
    }
    if (!out) throw io_error("export_weight_table: write failed for " + path);
}

} // namespace tln
