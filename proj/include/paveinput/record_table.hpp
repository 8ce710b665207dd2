#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "paveinput/error.hpp"
#include "paveinput/io.hpp"
#include "paveinput/schema.hpp"

namespace paveinput {

enum class ColumnKind { numeric, boolean, categorical };

inline std::string_view to_string(ColumnKind k) {
    switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::boolean: return "boolean";
    case ColumnKind::categorical: return "categorical";
    }
    return "?";
}

/// Empty optional marks a missing cell. Categorical cells hold a level code.
using Cell = std::optional<double>;

/// Rectangular named-column table of operation records.
struct RecordTable {
    std::vector<std::string> column_names;
    std::vector<ColumnKind> column_kinds;
    std::vector<std::vector<Cell>> rows;

    std::size_t column_count() const { return column_names.size(); }
    std::size_t row_count() const { return rows.size(); }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i)
            if (column_names[i] == name) return i;
        return std::nullopt;
    }

    std::size_t index_of(std::string_view name) const {
        auto i = find(name);
        if (!i) throw DataError("column not found: " + std::string(name));
        return *i;
    }

    /// Non-missing values of one column, in row order.
    std::vector<double> present_values(std::size_t col) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows)
            if (r[col]) out.push_back(*r[col]);
        return out;
    }

    std::size_t missing_count() const {
        std::size_t n = 0;
        for (const auto& r : rows)
            for (const auto& c : r) n += c ? 0 : 1;
        return n;
    }

    void validate() const {
        require(column_kinds.size() == column_names.size(), "column kinds do not match column names");
        std::set<std::string_view> seen;
        for (const auto& n : column_names)
            require(seen.insert(n).second, "duplicate column name: " + n);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            require(rows[r].size() == column_names.size(),
                    "ragged row " + std::to_string(r + 1) + ": expected " +
                        std::to_string(column_names.size()) + " cells, found " +
                        std::to_string(rows[r].size()));
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                if (column_kinds[c] == ColumnKind::boolean && rows[r][c])
                    require(*rows[r][c] == 0.0 || *rows[r][c] == 1.0,
                            "boolean column " + column_names[c] + " holds a value other than 0/1 at row " +
                                std::to_string(r + 1));
            }
        }
    }

    friend bool operator==(const RecordTable&, const RecordTable&) = default;
};

inline ColumnKind schema_kind(std::string_view name) {
    return is_indicator_column(name) ? ColumnKind::boolean : ColumnKind::numeric;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// Parses CSV text with a header row. Lines starting with '#' and blank lines
/// are skipped. Empty fields become missing cells. Row numbers in errors are
/// 1-based data-row indices; column numbers are 1-based.
inline RecordTable parse_csv(std::string_view text, std::string_view source = "<csv>") {
    RecordTable t;
    bool have_header = false;
    std::size_t data_row = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty() || line.front() == '#') {
            if (eol == text.size()) break;
            continue;
        }
        auto fields = detail::split_fields(line);
        if (!have_header) {
            for (auto f : fields) {
                require(!f.empty(), std::string(source) + ": empty column name in header");
                t.column_names.emplace_back(f);
                t.column_kinds.push_back(schema_kind(f));
            }
            have_header = true;
        } else {
            ++data_row;
            if (fields.size() != t.column_names.size())
                throw DataError(std::string(source) + ": ragged row " + std::to_string(data_row) + ": expected " +
                                std::to_string(t.column_names.size()) + " cells, found " +
                                std::to_string(fields.size()));
            std::vector<Cell> row;
            row.reserve(fields.size());
            for (std::size_t c = 0; c < fields.size(); ++c) {
                if (fields[c].empty()) {
                    row.emplace_back(std::nullopt);
                    continue;
                }
                double v = 0.0;
                if (!parse_double(fields[c], v) || !std::isfinite(v))
                    throw DataError(std::string(source) + ": unparseable numeric cell '" + std::string(fields[c]) +
                                    "' at row " + std::to_string(data_row) + ", column " + std::to_string(c + 1) +
                                    " (" + t.column_names[c] + ")");
                row.emplace_back(v);
            }
            t.rows.push_back(std::move(row));
        }
        if (eol == text.size()) break;
    }
    require(have_header, std::string(source) + ": missing header row");
    t.validate();
    return t;
}

inline RecordTable load_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
    return parse_csv(read_file(path), path.string());
}

inline std::string to_csv(const RecordTable& t) {
    std::string out;
    for (std::size_t c = 0; c < t.column_count(); ++c) {
        if (c) out += ',';
        out += t.column_names[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            if (row[c]) out += format_double(*row[c]);
        }
        out += '\n';
    }
    return out;
}

} // namespace paveinput
