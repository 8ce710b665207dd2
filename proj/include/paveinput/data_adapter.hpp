#pragma once
// Data adapter: connects record tables from several sources, cleans missing
// values and outliers, encodes/normalizes the result and splits it for
// training.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paveinput/error.hpp"
#include "paveinput/random.hpp"
#include "paveinput/record_table.hpp"
#include "paveinput/schema.hpp"
#include "paveinput/stats.hpp"

namespace paveinput {

// ---------------------------------------------------------------- join

struct JoinResult {
    RecordTable table;
    std::size_t dropped_rows = 0;
};

/// Inner join on `key_column`. Rows keep the order of the first table; the
/// key column appears once, followed by each table's remaining columns.
/// `dropped_rows` counts input rows (over all tables) without a full match.
inline JoinResult join_sources(const std::vector<RecordTable>& tables, const std::string& key_column) {
    require(!tables.empty(), "join needs at least one table");

    std::vector<std::size_t> key_idx;
    std::vector<std::map<double, std::size_t>> lookup(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t) {
        auto k = tables[t].find(key_column);
        require(k.has_value(), "key column '" + key_column + "' absent from table " + std::to_string(t + 1));
        key_idx.push_back(*k);
        for (std::size_t r = 0; r < tables[t].row_count(); ++r) {
            const Cell& cell = tables[t].rows[r][*k];
            require(cell.has_value(), "missing key value in table " + std::to_string(t + 1) + " row " +
                                          std::to_string(r + 1));
            require(lookup[t].emplace(*cell, r).second,
                    "duplicate key " + format_double(*cell) + " in table " + std::to_string(t + 1));
        }
    }

    JoinResult out;
    RecordTable& j = out.table;
    j.column_names.push_back(key_column);
    j.column_kinds.push_back(tables[0].column_kinds[key_idx[0]]);
    for (std::size_t t = 0; t < tables.size(); ++t) {
        for (std::size_t c = 0; c < tables[t].column_count(); ++c) {
            if (c == key_idx[t]) continue;
            require(!j.find(tables[t].column_names[c]).has_value(),
                    "column '" + tables[t].column_names[c] + "' appears in more than one source");
            j.column_names.push_back(tables[t].column_names[c]);
            j.column_kinds.push_back(tables[t].column_kinds[c]);
        }
    }

    std::size_t total_rows = 0;
    for (const auto& t : tables) total_rows += t.row_count();

    for (const auto& row0 : tables[0].rows) {
        const double key = *row0[key_idx[0]];
        std::vector<std::size_t> match(tables.size());
        bool all = true;
        for (std::size_t t = 0; t < tables.size() && all; ++t) {
            auto it = lookup[t].find(key);
            if (it == lookup[t].end()) all = false;
            else match[t] = it->second;
        }
        if (!all) continue;
        std::vector<Cell> row;
        row.reserve(j.column_count());
        row.emplace_back(key);
        for (std::size_t t = 0; t < tables.size(); ++t) {
            const auto& src = tables[t].rows[match[t]];
            for (std::size_t c = 0; c < src.size(); ++c)
                if (c != key_idx[t]) row.push_back(src[c]);
        }
        j.rows.push_back(std::move(row));
    }
    out.dropped_rows = total_rows - j.row_count() * tables.size();
    return out;
}

// ---------------------------------------------------------------- clean

enum class MissingStrategy { drop_row, impute_median };
enum class OutlierStrategy { flag_only, drop_row };

struct CleanPolicy {
    MissingStrategy missing_strategy = MissingStrategy::impute_median;
    OutlierStrategy outlier_strategy = OutlierStrategy::flag_only;
    double iqr_multiplier = 1.5;

    void validate() const { require(iqr_multiplier > 0.0, "iqr multiplier must be positive"); }
};

struct ColumnCleanStats {
    std::string column;
    std::size_t missing = 0;
    std::size_t imputed = 0;
    std::size_t outliers = 0;
    double lower_fence = 0.0;
    double upper_fence = 0.0;
    bool fenced = false;
    std::vector<std::size_t> outlier_rows; // input-row indices (0-based)
};

struct CleanReport {
    CleanPolicy policy;
    std::size_t input_rows = 0;
    std::size_t output_rows = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_dropped_outlier = 0;
    std::vector<ColumnCleanStats> columns;

    /// True when cleaning changed nothing and found nothing.
    bool empty() const {
        if (rows_dropped_missing || rows_dropped_outlier) return false;
        for (const auto& c : columns)
            if (c.missing || c.imputed || c.outliers) return false;
        return true;
    }
};

struct CleanResult {
    RecordTable table;
    CleanReport report;
};

struct Fences {
    double q1, q3, lower, upper;
};

/// Tukey fences [Q1 - k*IQR, Q3 + k*IQR] with interpolated quartiles.
inline Fences tukey_fences(std::vector<double> values, double k) {
    std::sort(values.begin(), values.end());
    const double q1 = stats::quantile_sorted(values, 0.25);
    const double q3 = stats::quantile_sorted(values, 0.75);
    const double iqr = q3 - q1;
    return {q1, q3, q1 - k * iqr, q3 + k * iqr};
}

/// Missing cells first (drop or impute), then outliers on numeric columns.
/// Boolean columns are never fenced and are imputed with their majority
/// value (ties to 0) so they stay 0/1. Under OutlierStrategy::drop_row the
/// fence pass repeats until no value lies outside, which makes the whole
/// operation idempotent.
inline CleanResult clean(const RecordTable& table, const CleanPolicy& policy) {
    policy.validate();
    table.validate();

    CleanResult res;
    res.table = table;
    CleanReport& rep = res.report;
    rep.policy = policy;
    rep.input_rows = table.row_count();
    const std::size_t ncol = table.column_count();
    rep.columns.resize(ncol);
    for (std::size_t c = 0; c < ncol; ++c) {
        rep.columns[c].column = table.column_names[c];
        for (const auto& r : table.rows) rep.columns[c].missing += r[c] ? 0 : 1;
    }

    // Tracks which input row each surviving row came from.
    std::vector<std::size_t> origin(table.row_count());
    for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = i;

    auto& rows = res.table.rows;
    if (policy.missing_strategy == MissingStrategy::drop_row) {
        std::vector<std::vector<Cell>> kept;
        std::vector<std::size_t> kept_origin;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            bool complete = std::all_of(rows[r].begin(), rows[r].end(), [](const Cell& c) { return c.has_value(); });
            if (complete) {
                kept.push_back(std::move(rows[r]));
                kept_origin.push_back(origin[r]);
            }
        }
        rep.rows_dropped_missing = rows.size() - kept.size();
        rows = std::move(kept);
        origin = std::move(kept_origin);
    } else {
        for (std::size_t c = 0; c < ncol; ++c) {
            if (rep.columns[c].missing == 0) continue;
            auto present = res.table.present_values(c);
            require(!present.empty(), "column '" + table.column_names[c] + "' is entirely missing; no median exists");
            double fill;
            if (table.column_kinds[c] == ColumnKind::boolean) {
                auto ones = static_cast<std::size_t>(std::count(present.begin(), present.end(), 1.0));
                fill = (2 * ones > present.size()) ? 1.0 : 0.0;
            } else {
                fill = stats::median(std::move(present));
            }
            for (auto& r : rows) {
                if (!r[c]) {
                    r[c] = fill;
                    ++rep.columns[c].imputed;
                }
            }
        }
    }

    for (;;) {
        std::vector<bool> drop(rows.size(), false);
        bool any = false;
        for (std::size_t c = 0; c < ncol; ++c) {
            if (table.column_kinds[c] != ColumnKind::numeric) continue;
            auto present = res.table.present_values(c);
            if (present.empty()) continue;
            const Fences f = tukey_fences(std::move(present), policy.iqr_multiplier);
            auto& cs = rep.columns[c];
            cs.lower_fence = f.lower;
            cs.upper_fence = f.upper;
            cs.fenced = true;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (!rows[r][c]) continue;
                const double v = *rows[r][c];
                if (v < f.lower || v > f.upper) {
                    ++cs.outliers;
                    cs.outlier_rows.push_back(origin[r]);
                    drop[r] = true;
                    any = true;
                }
            }
        }
        if (!any || policy.outlier_strategy == OutlierStrategy::flag_only) break;
        std::vector<std::vector<Cell>> kept;
        std::vector<std::size_t> kept_origin;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (drop[r]) continue;
            kept.push_back(std::move(rows[r]));
            kept_origin.push_back(origin[r]);
        }
        rep.rows_dropped_outlier += rows.size() - kept.size();
        rows = std::move(kept);
        origin = std::move(kept_origin);
    }
    for (auto& cs : rep.columns) std::sort(cs.outlier_rows.begin(), cs.outlier_rows.end());

    rep.output_rows = rows.size();
    return res;
}

// ---------------------------------------------------------------- encode

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Affine maps between physical units and the network's normalized units.
/// Indicator features are stored with mean 0 and std 1, i.e. passed through.
struct NormalizationStats {
    std::vector<std::string> feature_names;
    std::vector<ColumnKind> feature_kinds;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::string target_name;
    double target_mean = 0.0;
    double target_stddev = 1.0;

    std::size_t feature_count() const { return feature_names.size(); }

    std::vector<double> normalize_features(std::span<const double> raw) const {
        require(raw.size() == feature_count(), "feature vector has " + std::to_string(raw.size()) +
                                                   " entries, expected " + std::to_string(feature_count()));
        std::vector<double> z(raw.size());
        for (std::size_t j = 0; j < raw.size(); ++j) z[j] = (raw[j] - mean[j]) / stddev[j];
        return z;
    }

    std::vector<double> denormalize_features(std::span<const double> z) const {
        require(z.size() == feature_count(), "normalized feature vector has the wrong length");
        std::vector<double> raw(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) raw[j] = z[j] * stddev[j] + mean[j];
        return raw;
    }

    double normalize_target(double y) const { return (y - target_mean) / target_stddev; }
    double denormalize_target(double z) const { return z * target_stddev + target_mean; }

    /// True when the features are exactly the nine record attributes in
    /// canonical order.
    bool has_record_schema() const {
        if (feature_names.size() != kFeatureColumns.size()) return false;
        for (std::size_t j = 0; j < kFeatureColumns.size(); ++j)
            if (feature_names[j] != kFeatureColumns[j]) return false;
        return true;
    }

    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

struct Dataset {
    Matrix features;                 // n x d, normalized
    std::vector<double> target;      // n, normalized
    std::vector<std::size_t> row_ids; // source-table row of each sample
    NormalizationStats stats;

    std::size_t size() const { return target.size(); }

    void validate() const {
        require(features.rows == target.size(), "feature rows and target length differ");
        require(row_ids.size() == target.size(), "row ids and target length differ");
        require(features.cols == stats.feature_count(), "feature columns and stats differ");
        for (double v : features.data) require(std::isfinite(v), "non-finite feature value");
        for (double v : target) require(std::isfinite(v), "non-finite target value");
    }

    Dataset subset(std::span<const std::size_t> idx) const {
        Dataset out;
        out.stats = stats;
        out.features = Matrix(idx.size(), features.cols);
        out.target.resize(idx.size());
        out.row_ids.resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = features.row(idx[i]);
            std::copy(src.begin(), src.end(), out.features.row(i).begin());
            out.target[i] = target[idx[i]];
            out.row_ids[i] = row_ids[idx[i]];
        }
        return out;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Feature columns: the nine record attributes when all are present (in
/// canonical order), otherwise every column except the target, the excluded
/// ones and ground-truth columns. Continuous columns and the target are
/// z-scored with population moments.
inline Dataset encode_and_normalize(const RecordTable& table, const std::string& target_column,
                                    const std::vector<std::string>& excluded = {}) {
    table.validate();
    const std::size_t tcol = table.index_of(target_column);
    require(table.column_kinds[tcol] == ColumnKind::numeric, "target column must be numeric");
    require(table.row_count() >= 1, "cannot encode an empty table");
    require(table.missing_count() == 0, "table still has missing cells; clean it first");

    std::vector<std::size_t> cols;
    bool schema = std::all_of(kFeatureColumns.begin(), kFeatureColumns.end(),
                              [&](std::string_view n) { return table.find(n).has_value(); });
    if (schema) {
        for (auto n : kFeatureColumns) cols.push_back(table.index_of(n));
    } else {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            const auto& name = table.column_names[c];
            if (c == tcol || is_truth_column(name)) continue;
            if (std::find(excluded.begin(), excluded.end(), name) != excluded.end()) continue;
            cols.push_back(c);
        }
    }
    require(!cols.empty(), "no feature columns remain");

    const std::size_t n = table.row_count();
    Dataset ds;
    NormalizationStats& st = ds.stats;
    st.target_name = target_column;

    auto column = [&](std::size_t c) {
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) {
            v[r] = *table.rows[r][c];
            if (!std::isfinite(v[r])) throw DataError("non-finite value in column " + table.column_names[c]);
        }
        return v;
    };

    for (std::size_t c : cols) {
        const auto& name = table.column_names[c];
        const ColumnKind kind = table.column_kinds[c];
        require(kind != ColumnKind::categorical, "categorical column '" + name + "' cannot be encoded");
        st.feature_names.push_back(name);
        st.feature_kinds.push_back(kind);
        if (kind == ColumnKind::boolean) {
            st.mean.push_back(0.0);
            st.stddev.push_back(1.0);
        } else {
            auto v = column(c);
            const double sd = stats::population_stddev(v);
            if (!(sd > 0.0)) throw DataError("constant continuous column '" + name + "' (std = 0)");
            st.mean.push_back(stats::mean(v));
            st.stddev.push_back(sd);
        }
    }
    {
        auto y = column(tcol);
        st.target_mean = stats::mean(y);
        st.target_stddev = stats::population_stddev(y);
        if (!(st.target_stddev > 0.0)) throw DataError("constant target column (std = 0)");
        ds.target.resize(n);
        for (std::size_t r = 0; r < n; ++r) ds.target[r] = st.normalize_target(y[r]);
    }

    ds.features = Matrix(n, cols.size());
    ds.row_ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        ds.row_ids[r] = r;
        for (std::size_t j = 0; j < cols.size(); ++j)
            ds.features(r, j) = (*table.rows[r][cols[j]] - st.mean[j]) / st.stddev[j];
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------- split

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Seeded random partition; the train side holds floor(n * fraction) rows.
inline SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
    const std::size_t n = ds.size();
    require(n >= 2, "split needs at least two rows");
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
    require(n_train >= 1 && n_train < n, "train fraction " + format_double(train_fraction) + " leaves one side of a " +
                                             std::to_string(n) + "-row split empty");
    Rng rng(seed);
    const auto perm = random_permutation(n, rng);
    std::span<const std::size_t> p(perm);
    return {ds.subset(p.first(n_train)), ds.subset(p.subspan(n_train))};
}

} // namespace paveinput
