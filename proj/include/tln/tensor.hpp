#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tln/error.hpp"

namespace tln {

#ifdef TLN_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

/// Dense 2-D array of real values, row-major, with the sequence position as
/// the slow (row) axis and the feature as the fast (column) axis. Values are
/// immutable after construction; every operation below is a pure function.
/// Construction rejects NaN/Inf so numerical blow-ups surface at the source.
class SequenceTensor {
public:
    SequenceTensor(std::size_t rows, std::size_t cols, std::vector<real> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows_ < 1 || cols_ < 1) {
            throw shape_error("SequenceTensor: shape must be at least 1x1, got " +
                              shape_string());
        }
        if (data_.size() != rows_ * cols_) {
            throw shape_error("SequenceTensor: data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string());
        }
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i])) {
                throw value_error("SequenceTensor: non-finite entry at flat index " +
                                  std::to_string(i));
            }
        }
    }

    static SequenceTensor zeros(std::size_t rows, std::size_t cols) {
        return SequenceTensor(rows, cols, std::vector<real>(rows * cols, real(0)));
    }

    static SequenceTensor constant(std::size_t rows, std::size_t cols, real v) {
        return SequenceTensor(rows, cols, std::vector<real>(rows * cols, v));
    }

    static SequenceTensor identity(std::size_t n) {
        std::vector<real> d(n * n, real(0));
        for (std::size_t i = 0; i < n; ++i) d[i * n + i] = real(1);
        return SequenceTensor(n, n, std::move(d));
    }

    /// Row-wise literal, e.g. from_rows({{1,2},{3,4}}).
    static SequenceTensor from_rows(std::initializer_list<std::initializer_list<real>> rows) {
        std::vector<real> d;
        std::size_t ncols = rows.begin() == rows.end() ? 0 : rows.begin()->size();
        for (const auto& r : rows) {
            if (r.size() != ncols) throw shape_error("from_rows: ragged rows");
            d.insert(d.end(), r.begin(), r.end());
        }
        return SequenceTensor(rows.size(), ncols, std::move(d));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    real operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const real> data() const { return data_; }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool same_shape(const SequenceTensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    /// Bit-exact equality.
    friend bool operator==(const SequenceTensor& a, const SequenceTensor& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<real> data_;
};

enum class Axis { rows, cols };

/// Standard matrix product, (a.rows x a.cols) * (b.rows x b.cols).
inline SequenceTensor matmul(const SequenceTensor& a, const SequenceTensor& b) {
    if (a.cols() != b.rows()) {
        throw shape_error("matmul: inner dimensions differ, " + a.shape_string() +
                          " vs " + b.shape_string());
    }
    std::vector<real> out(a.rows() * b.cols(), real(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const real aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out[i * b.cols() + j] += aik * b(k, j);
            }
        }
    }
    return SequenceTensor(a.rows(), b.cols(), std::move(out));
}

/// Multiplies each entry by the kernel value of its row (axis=rows) or its
/// column (axis=cols). This is the K/F/tau elementwise scaling with the
/// kernel broadcast along the other axis.
inline SequenceTensor hadamard_broadcast(const SequenceTensor& t, std::span<const real> k,
                                         Axis axis) {
    const std::size_t extent = axis == Axis::rows ? t.rows() : t.cols();
    if (k.size() != extent) {
        throw shape_error("hadamard_broadcast: kernel length " + std::to_string(k.size()) +
                          " does not match " + (axis == Axis::rows ? std::string("rows") : std::string("cols")) +
                          " of " + t.shape_string());
    }
    std::vector<real> out(t.size());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            out[i * t.cols() + j] = t(i, j) * (axis == Axis::rows ? k[i] : k[j]);
        }
    }
    return SequenceTensor(t.rows(), t.cols(), std::move(out));
}

inline SequenceTensor transpose(const SequenceTensor& t) {
    std::vector<real> out(t.size());
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) out[j * t.rows() + i] = t(i, j);
    return SequenceTensor(t.cols(), t.rows(), std::move(out));
}

inline SequenceTensor add(const SequenceTensor& a, const SequenceTensor& b) {
    if (!a.same_shape(b)) {
        throw shape_error("add: shapes differ, " + a.shape_string() + " vs " + b.shape_string());
    }
    std::vector<real> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return SequenceTensor(a.rows(), a.cols(), std::move(out));
}

inline SequenceTensor sub(const SequenceTensor& a, const SequenceTensor& b) {
    if (!a.same_shape(b)) {
        throw shape_error("sub: shapes differ, " + a.shape_string() + " vs " + b.shape_string());
    }
    std::vector<real> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return SequenceTensor(a.rows(), a.cols(), std::move(out));
}

inline SequenceTensor scale(const SequenceTensor& t, real c) {
    std::vector<real> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t.data()[i] * c;
    return SequenceTensor(t.rows(), t.cols(), std::move(out));
}

inline real max_abs(const SequenceTensor& t) {
    real m = 0;
    for (real v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

inline real max_abs_diff(const SequenceTensor& a, const SequenceTensor& b) {
    if (!a.same_shape(b)) {
        throw shape_error("max_abs_diff: shapes differ, " + a.shape_string() + " vs " +
                          b.shape_string());
    }
    real m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

} // namespace tln
