#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tln/error.hpp"
#include "tln/tensor.hpp"

namespace tln {

struct TimeSeriesFrame {
    std::vector<std::int64_t> timestamps; // epoch seconds, strictly increasing
    std::vector<std::string> column_names;
    std::vector<std::vector<real>> columns; // one series per name
    std::string target_column;

    std::size_t length() const { return timestamps.size(); }

    std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i) {
            if (column_names[i] == name) return i;
        }
        return std::nullopt;
    }

    const std::vector<real>& column(std::string_view name) const {
        const auto idx = column_index(name);
        if (!idx) throw data_error("no column named '" + std::string(name) + "'");
        return columns[*idx];
    }
};

namespace detail {

// days since 1970-01-01 for a civil date (valid across the whole int range)
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len,
                             unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + unsigned(s[i] - '0');
    }
    out = v;
    return true;
}

// "YYYY-MM-DD HH:MM[:SS]" with ' ' or 'T' between date and time
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    unsigned y, mo, d, hh, mi, ss = 0;
    if (!parse_fixed_uint(s, 0, 4, y) || s.size() < 16) return std::nullopt;
    if (s[4] != '-' || !parse_fixed_uint(s, 5, 2, mo)) return std::nullopt;
    if (s[7] != '-' || !parse_fixed_uint(s, 8, 2, d)) return std::nullopt;
    if (s[10] != ' ' && s[10] != 'T') return std::nullopt;
    if (!parse_fixed_uint(s, 11, 2, hh) || s[13] != ':' || !parse_fixed_uint(s, 14, 2, mi)) {
        return std::nullopt;
    }
    if (s.size() > 16) {
        if (s.size() != 19 || s[16] != ':' || !parse_fixed_uint(s, 17, 2, ss)) {
            return std::nullopt;
        }
    } else if (s.size() != 16) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh > 23 || mi > 59 || ss > 59) {
        return std::nullopt;
    }
    return days_from_civil(std::int64_t(y), mo, d) * 86400 + std::int64_t(hh) * 3600 +
           std::int64_t(mi) * 60 + std::int64_t(ss);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace detail

inline int hour_of_day(std::int64_t epoch_seconds) {
    const std::int64_t sec = epoch_seconds - detail::floor_div(epoch_seconds, 86400) * 86400;
    return int(sec / 3600);
}

/// Monday = 0 .. Sunday = 6.
inline int day_of_week(std::int64_t epoch_seconds) {
    const std::int64_t days = detail::floor_div(epoch_seconds, 86400);
    return int(((days + 3) % 7 + 7) % 7); // 1970-01-01 was a Thursday
}

inline TimeSeriesFrame load_csv(const std::string& path, const std::string& timestamp_column,
                                const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw io_error("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("load_csv: " + path + " is empty");
    TimeSeriesFrame frame;
    std::size_t ts_index = SIZE_MAX;
    {
        const auto fields = detail::split_csv_line(line);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string name(detail::strip(fields[i]));
            if (name == timestamp_column) {
                ts_index = i;
            } else {
                frame.column_names.push_back(name);
            }
        }
    }
    if (ts_index == SIZE_MAX) {
        throw data_error("load_csv: " + path + " has no timestamp column '" + timestamp_column +
                         "'");
    }
    if (std::find(frame.column_names.begin(), frame.column_names.end(), target_column) ==
        frame.column_names.end()) {
        throw data_error("load_csv: " + path + " has no target column '" + target_column + "'");
    }
    frame.target_column = target_column;
    frame.columns.resize(frame.column_names.size());
    const std::size_t n_fields = frame.column_names.size() + 1;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto stripped = detail::strip(line);
        if (stripped.empty()) continue;
        const auto fields = detail::split_csv_line(stripped);
        if (fields.size() != n_fields) {
            throw data_error("load_csv: " + path + " row " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n_fields));
        }
        const auto ts_text = detail::strip(fields[ts_index]);
        const auto ts = detail::parse_timestamp(ts_text);
        if (!ts) {
            throw data_error("load_csv: " + path + " row " + std::to_string(line_no) +
                             ": unparseable timestamp '" + std::string(ts_text) + "'");
        }
        if (!frame.timestamps.empty() && *ts <= frame.timestamps.back()) {
            throw data_error("load_csv: " + path + " row " + std::to_string(line_no) +
                             ": timestamp not strictly increasing");
        }
        frame.timestamps.push_back(*ts);
        std::size_t col = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == ts_index) continue;
            const auto cell = detail::strip(fields[i]);
            real v = 0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
                !std::isfinite(v)) {
                throw data_error("load_csv: " + path + " row " + std::to_string(line_no) +
                                 ", column '" + frame.column_names[col] + "': unparseable value '" +
                                 std::string(cell) + "'");
            }
            frame.columns[col].push_back(v);
            ++col;
        }
    }
    if (frame.timestamps.empty()) {
        throw data_error("load_csv: " + path + " has a header but no data rows");
    }
    return frame;
}

inline TimeSeriesFrame add_time_features(const TimeSeriesFrame& frame) {
    for (const char* name : {"hour", "day_of_week"}) {
        if (frame.column_index(name)) {
            throw data_error("add_time_features: column '" + std::string(name) +
                             "' already present");
        }
    }
    TimeSeriesFrame out = frame;
    std::vector<real> hours, dows;
    hours.reserve(frame.length());
    dows.reserve(frame.length());
    for (const auto ts : frame.timestamps) {
        hours.push_back(real(hour_of_day(ts)));
        dows.push_back(real(day_of_week(ts)));
    }
    out.column_names.push_back("hour");
    out.columns.push_back(std::move(hours));
    out.column_names.push_back("day_of_week");
    out.columns.push_back(std::move(dows));
    return out;
}

enum class ScalerKind { minmax, standard };

/// Per-column affine scaling: minmax maps the fit range onto [0,1], standard
/// to zero mean and unit (population) variance. Constant columns transform
/// to 0 and invert back to the constant.
struct ScalerState {
    ScalerKind kind = ScalerKind::standard;
    std::vector<std::string> columns;
    std::vector<real> offset; // min or mean
    std::vector<real> span;   // max-min or std; 0 marks a constant column

    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw data_error("scaler was not fitted on column '" + std::string(name) + "'");
    }

    real transform_value(std::size_t idx, real v) const {
        return span[idx] == real(0) ? real(0) : (v - offset[idx]) / span[idx];
    }

    real inverse_value(std::size_t idx, real v) const {
        return span[idx] == real(0) ? offset[idx] : v * span[idx] + offset[idx];
    }
};

inline ScalerState fit_scaler(const TimeSeriesFrame& frame, ScalerKind kind) {
    if (frame.length() == 0) throw data_error("fit_scaler: empty frame");
    ScalerState s;
    s.kind = kind;
    s.columns = frame.column_names;
    for (const auto& col : frame.columns) {
        if (kind == ScalerKind::minmax) {
            real lo = col[0], hi = col[0];
            for (real v : col) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            s.offset.push_back(lo);
            s.span.push_back(hi - lo);
        } else {
            real mean = 0;
            for (real v : col) mean += v;
            mean /= real(col.size());
            real ss = 0;
            for (real v : col) ss += (v - mean) * (v - mean);
            s.offset.push_back(mean);
            s.span.push_back(std::sqrt(ss / real(col.size())));
        }
    }
    return s;
}

inline TimeSeriesFrame transform(const TimeSeriesFrame& frame, const ScalerState& scaler) {
    TimeSeriesFrame out = frame;
    for (std::size_t c = 0; c < out.column_names.size(); ++c) {
        const std::size_t idx = scaler.index_of(out.column_names[c]);
        for (auto& v : out.columns[c]) v = scaler.transform_value(idx, v);
    }
    return out;
}

inline TimeSeriesFrame inverse_transform(const TimeSeriesFrame& frame,
                                         const ScalerState& scaler) {
    TimeSeriesFrame out = frame;
    for (std::size_t c = 0; c < out.column_names.size(); ++c) {
        const std::size_t idx = scaler.index_of(out.column_names[c]);
        for (auto& v : out.columns[c]) v = scaler.inverse_value(idx, v);
    }
    return out;
}

struct WindowedDataset {
    std::vector<SequenceTensor> inputs;  // each S x F
    std::vector<SequenceTensor> targets; // each H x 1
    std::vector<std::string> feature_names;
    std::string split_name;
    std::size_t seq_len = 0;
    std::size_t horizon = 0;
    std::optional<ScalerState> scaler;

    std::size_t size() const { return inputs.size(); }
};

enum class InputMode { univariate, multivariate };

inline WindowedDataset make_windows(const TimeSeriesFrame& frame, std::size_t seq_len,
                                    std::size_t horizon, InputMode mode, bool with_time,
                                    std::string split_name = "") {
    if (seq_len < 1 || horizon < 1) {
        throw config_error("make_windows: seq_len and horizon must be >= 1");
    }
    const std::size_t n = frame.length();
    if (n < seq_len + horizon) {
        throw config_error("make_windows: frame length " + std::to_string(n) + " < required " +
                           std::to_string(seq_len + horizon) + " (seq_len + horizon)");
    }
    std::vector<std::string> names;
    if (mode == InputMode::univariate) {
        names.push_back(frame.target_column);
        if (with_time) {
            names.push_back("hour");
            names.push_back("day_of_week");
        }
    } else {
        for (const auto& name : frame.column_names) {
            if (!with_time && (name == "hour" || name == "day_of_week")) continue;
            names.push_back(name);
        }
    }
    std::vector<const std::vector<real>*> cols;
    for (const auto& name : names) {
        const auto idx = frame.column_index(name);
        if (!idx) {
            throw data_error("make_windows: frame lacks column '" + name +
                             "' (was add_time_features applied?)");
        }
        cols.push_back(&frame.columns[*idx]);
    }
    const auto& target = frame.column(frame.target_column);
    const std::size_t f = names.size();
    const std::size_t count = n - seq_len - horizon + 1;

    WindowedDataset ds;
    ds.feature_names = std::move(names);
    ds.split_name = std::move(split_name);
    ds.seq_len = seq_len;
    ds.horizon = horizon;
    ds.inputs.reserve(count);
    ds.targets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<real> x(seq_len * f);
        for (std::size_t s = 0; s < seq_len; ++s)
            for (std::size_t j = 0; j < f; ++j) x[s * f + j] = (*cols[j])[i + s];
        ds.inputs.emplace_back(seq_len, f, std::move(x));
        std::vector<real> y(target.begin() + i + seq_len, target.begin() + i + seq_len + horizon);
        ds.targets.emplace_back(horizon, 1, std::move(y));
    }
    return ds;
}

struct SplitFrames {
    TimeSeriesFrame train;
    TimeSeriesFrame val;
    TimeSeriesFrame test;
};

namespace detail {

inline TimeSeriesFrame slice_frame(const TimeSeriesFrame& frame, std::size_t begin,
                                   std::size_t end) {
    TimeSeriesFrame out;
    out.column_names = frame.column_names;
    out.target_column = frame.target_column;
    out.timestamps.assign(frame.timestamps.begin() + begin, frame.timestamps.begin() + end);
    out.columns.reserve(frame.columns.size());
    for (const auto& col : frame.columns) {
        out.columns.emplace_back(col.begin() + begin, col.begin() + end);
    }
    return out;
}

} // namespace detail

/// Contiguous chronological segments, boundaries at the cumulative fraction
/// floors. The floor is taken after an ulp-scale nudge so that sums like
/// 0.7 + 0.2 land on the intended row instead of one short. No shuffling, so
/// windows never cross a split boundary.
inline SplitFrames chrono_split(const TimeSeriesFrame& frame, std::array<real, 3> fractions) {
    real cum = 0;
    for (real f : fractions) {
        if (f <= 0) throw config_error("chrono_split: fractions must be positive");
        cum += f;
    }
    if (cum > real(1) + real(1e-9)) {
        throw config_error("chrono_split: fractions sum to more than 1");
    }
    const auto n = real(frame.length());
    const auto boundary = [n](real fraction) {
        const real v = n * fraction;
        return std::size_t(std::floor(v * (real(1) + 8 * std::numeric_limits<real>::epsilon())));
    };
    const auto b1 = boundary(fractions[0]);
    const auto b2 = boundary(fractions[0] + fractions[1]);
    const auto b3 = std::min(boundary(cum), frame.length());
    return SplitFrames{detail::slice_frame(frame, 0, b1), detail::slice_frame(frame, b1, b2),
                       detail::slice_frame(frame, b2, b3)};
}

/// End-to-end dataset preparation: optional time features, chronological
/// split, scaler fitted on the training segment only, every segment
/// transformed with those statistics, then windowed.
struct PipelineConfig {
    std::string csv_path;
    std::string timestamp_column = "date";
    std::string target_column;
    std::size_t seq_len = 1;
    std::size_t horizon = 1;
    InputMode mode = InputMode::univariate;
    bool time_features = false;
    ScalerKind scaler = ScalerKind::standard;
    std::array<real, 3> split = {0.7, 0.2, 0.1};
};

struct DatasetBundle {
    WindowedDataset train;
    WindowedDataset val;
    WindowedDataset test;
};

inline DatasetBundle prepare_datasets_from_frame(TimeSeriesFrame frame,
                                                 const PipelineConfig& cfg) {
    if (cfg.time_features) frame = add_time_features(frame);
    const auto splits = chrono_split(frame, cfg.split);
    const auto scaler = fit_scaler(splits.train, cfg.scaler);
    DatasetBundle out{
        make_windows(transform(splits.train, scaler), cfg.seq_len, cfg.horizon, cfg.mode,
                     cfg.time_features, "train"),
        make_windows(transform(splits.val, scaler), cfg.seq_len, cfg.horizon, cfg.mode,
                     cfg.time_features, "val"),
        make_windows(transform(splits.test, scaler), cfg.seq_len, cfg.horizon, cfg.mode,
                     cfg.time_features, "test"),
    };
    out.train.scaler = scaler;
    out.val.scaler = scaler;
    out.test.scaler = scaler;
    return out;
}

inline DatasetBundle prepare_datasets(const PipelineConfig& cfg) {
    return prepare_datasets_from_frame(
        load_csv(cfg.csv_path, cfg.timestamp_column, cfg.target_column), cfg);
}

} // namespace tln
