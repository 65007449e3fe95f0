#ifndef TABSYNTH_TABLE_HPP
#define TABSYNTH_TABLE_HPP

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/stats.hpp"

namespace tabsynth {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<std::string> categories;  // Categorical only, fixed order
    double observed_min = 0.0;            // Numeric only
    double observed_max = 0.0;

    std::size_t category_index(const std::string& label) const {
        auto it = std::find(categories.begin(), categories.end(), label);
        if (it == categories.end())
            throw SchemaError("unknown category '" + label + "' in column '" + name + "'");
        return static_cast<std::size_t>(it - categories.begin());
    }
};

inline bool schema_compatible(const std::vector<ColumnSchema>& a,
                              const std::vector<ColumnSchema>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || a[i].kind != b[i].kind) return false;
    return true;
}

using NumericColumn = std::vector<double>;
using CategoricalColumn = std::vector<std::int32_t>;
using ColumnData = std::variant<NumericColumn, CategoricalColumn>;

// Column-oriented dataset. Numeric cells are doubles, categorical cells
// are indices into the schema's category list. Tables are treated as
// immutable once built; transformations return new tables.
struct Table {
    std::vector<ColumnSchema> schema;
    std::vector<ColumnData> columns;

    std::size_t n_rows() const {
        if (columns.empty()) return 0;
        return std::visit([](const auto& c) { return c.size(); }, columns.front());
    }
    std::size_t n_cols() const { return columns.size(); }

    const NumericColumn& numeric(std::size_t c) const { return std::get<NumericColumn>(columns[c]); }
    const CategoricalColumn& categorical(std::size_t c) const {
        return std::get<CategoricalColumn>(columns[c]);
    }
    NumericColumn& numeric(std::size_t c) { return std::get<NumericColumn>(columns[c]); }
    CategoricalColumn& categorical(std::size_t c) { return std::get<CategoricalColumn>(columns[c]); }

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t i = 0; i < schema.size(); ++i)
            if (schema[i].name == name) return i;
        return std::nullopt;
    }

    Table select_rows(std::span<const std::size_t> rows) const {
        Table out;
        out.schema = schema;
        out.columns.reserve(columns.size());
        for (const auto& col : columns) {
            std::visit(
                [&](const auto& c) {
                    std::decay_t<decltype(c)> picked;
                    picked.reserve(rows.size());
                    for (std::size_t r : rows) picked.push_back(c[r]);
                    out.columns.emplace_back(std::move(picked));
                },
                col);
        }
        return out;
    }

    // first n rows, in order
    Table head(std::size_t n) const {
        std::vector<std::size_t> rows(std::min(n, n_rows()));
        std::iota(rows.begin(), rows.end(), 0);
        return select_rows(rows);
    }

    Table drop_column(std::size_t c) const {
        Table out;
        out.schema = schema;
        out.schema.erase(out.schema.begin() + static_cast<std::ptrdiff_t>(c));
        out.columns = columns;
        out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(c));
        return out;
    }

    void refresh_numeric_bounds() {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].kind != ColumnKind::Numeric) continue;
            const auto& v = numeric(c);
            if (v.empty()) continue;
            auto [mn, mx] = std::minmax_element(v.begin(), v.end());
            schema[c].observed_min = *mn;
            schema[c].observed_max = *mx;
        }
    }
};

using SchemaHints = std::map<std::string, ColumnKind>;

struct LoadStats {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_missing = 0;  // rows containing any empty cell
};

namespace detail {

// RFC-4180-style record reader: handles quoted fields, embedded commas,
// doubled quotes and quoted newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        saw_any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!saw_any) return false;
    fields.push_back(std::move(field));
    return true;
}

inline bool parse_finite_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE || !std::isfinite(v)) return false;
    out = v;
    return true;
}

inline std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace detail

// Loads a header-first CSV. Schema is inferred per column (Numeric when
// every non-empty cell parses as a finite real, Categorical otherwise)
// unless the hint or explicit schema overrides it. Rows containing empty
// cells are dropped; the count is reported through `stats`.
inline Table load_csv(const std::filesystem::path& path, const SchemaHints& hints = {},
                      LoadStats* stats = nullptr,
                      const std::vector<ColumnSchema>* explicit_schema = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::vector<std::string> header;
    if (!detail::read_csv_record(in, header) || (header.size() == 1 && header[0].empty()))
        throw EmptyInputError("'" + path.string() + "' is empty");

    const std::size_t width = header.size();
    std::vector<std::vector<std::string>> raw(width);
    std::vector<std::string> record;
    std::size_t line = 1;
    LoadStats local;
    while (detail::read_csv_record(in, record)) {
        ++line;
        if (record.size() == 1 && record[0].empty()) continue;  // blank trailing line
        if (record.size() != width)
            throw FormatError("'" + path.string() + "' line " + std::to_string(line) + ": expected " +
                              std::to_string(width) + " fields, got " + std::to_string(record.size()));
        ++local.rows_read;
        const bool has_missing =
            std::any_of(record.begin(), record.end(), [](const std::string& f) { return f.empty(); });
        if (has_missing) {
            ++local.rows_dropped_missing;
            continue;
        }
        for (std::size_t c = 0; c < width; ++c) raw[c].push_back(std::move(record[c]));
    }

    Table t;
    t.schema.resize(width);
    t.columns.resize(width);
    for (std::size_t c = 0; c < width; ++c) {
        ColumnSchema& cs = t.schema[c];
        cs.name = header[c];

        std::optional<ColumnKind> forced;
        if (explicit_schema) {
            if (explicit_schema->size() != width ||
                (*explicit_schema)[c].name != cs.name)
                throw SchemaError("explicit schema does not match header of '" + path.string() + "'");
            forced = (*explicit_schema)[c].kind;
        } else if (auto it = hints.find(cs.name); it != hints.end()) {
            forced = it->second;
        }

        bool numeric_ok = !raw[c].empty();
        std::vector<double> parsed;
        parsed.reserve(raw[c].size());
        for (const auto& cell : raw[c]) {
            double v;
            if (!detail::parse_finite_double(cell, v)) {
                numeric_ok = false;
                break;
            }
            parsed.push_back(v);
        }

        const bool as_numeric = forced ? *forced == ColumnKind::Numeric : numeric_ok;
        if (as_numeric) {
            if (!numeric_ok)
                throw SchemaError("column '" + cs.name + "' hinted numeric but has non-numeric cells");
            cs.kind = ColumnKind::Numeric;
            t.columns[c] = std::move(parsed);
        } else {
            cs.kind = ColumnKind::Categorical;
            CategoricalColumn idx;
            idx.reserve(raw[c].size());
            if (explicit_schema) {
                cs.categories = (*explicit_schema)[c].categories;
                for (const auto& cell : raw[c])
                    idx.push_back(static_cast<std::int32_t>(cs.category_index(cell)));
            } else {
                std::map<std::string, std::int32_t> seen;  // first-appearance order via categories
                for (const auto& cell : raw[c]) {
                    auto it = seen.find(cell);
                    if (it == seen.end()) {
                        it = seen.emplace(cell, static_cast<std::int32_t>(cs.categories.size())).first;
                        cs.categories.push_back(cell);
                    }
                    idx.push_back(it->second);
                }
            }
            t.columns[c] = std::move(idx);
        }
    }
    t.refresh_numeric_bounds();
    if (stats) *stats = local;
    return t;
}

inline void write_csv(const Table& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (c) out << ',';
        out << detail::csv_escape(t.schema[c].name);
    }
    out << '\n';
    const std::size_t n = t.n_rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            if (c) out << ',';
            if (t.schema[c].kind == ColumnKind::Numeric) {
                out << detail::format_cell(t.numeric(c)[r]);
            } else {
                out << detail::csv_escape(
                    t.schema[c].categories[static_cast<std::size_t>(t.categorical(c)[r])]);
            }
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t repetitions = 1;
};

// Disjoint (train, test) partition. The permutation is a pure function of
// (seed, repetition_index), so splits replay bit-identically.
inline std::pair<Table, Table> train_test_split(const Table& t, const SplitSpec& spec,
                                                std::size_t repetition_index) {
    if (repetition_index >= spec.repetitions)
        throw ContractError("train_test_split: repetition_index out of range");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ContractError("train_test_split: train_fraction must lie in (0,1)");
    const std::size_t n = t.n_rows();
    const std::size_t n_train =
        static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2)
        throw ContractError("train_test_split: table too small for spec");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    DeterministicRng rng(derive_seed(spec.seed, "split", std::to_string(repetition_index)));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.bounded(i);
        std::swap(perm[i - 1], perm[j]);
    }
    const std::span<const std::size_t> train_rows(perm.data(), n_train);
    const std::span<const std::size_t> test_rows(perm.data() + n_train, n - n_train);
    auto train = t.select_rows(train_rows);
    auto test = t.select_rows(test_rows);
    train.refresh_numeric_bounds();
    test.refresh_numeric_bounds();
    return {std::move(train), std::move(test)};
}

struct ScalerParams {
    std::vector<ColumnSchema> schema;
    std::vector<double> means;  // per column; 0 for categorical slots
    std::vector<double> stds;   // 0 marks a constant column
};

// Column-wise z-scoring, sample std (n-1). Constant columns map to 0.
inline ScalerParams standardize_fit(const Table& t) {
    if (t.n_rows() < 2) throw ContractError("standardize_fit: need at least 2 rows");
    ScalerParams p;
    p.schema = t.schema;
    p.means.resize(t.n_cols(), 0.0);
    p.stds.resize(t.n_cols(), 0.0);
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.schema[c].kind != ColumnKind::Numeric) continue;
        p.means[c] = mean_of(t.numeric(c));
        p.stds[c] = sample_std(t.numeric(c));
    }
    return p;
}

inline Table standardize_apply(const Table& t, const ScalerParams& p) {
    if (!schema_compatible(t.schema, p.schema))
        throw SchemaError("standardize_apply: scaler fitted on a different schema");
    Table out = t;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.schema[c].kind != ColumnKind::Numeric) continue;
        auto& v = out.numeric(c);
        if (p.stds[c] <= 0.0) {
            std::fill(v.begin(), v.end(), 0.0);
        } else {
            for (double& x : v) x = (x - p.means[c]) / p.stds[c];
        }
    }
    out.refresh_numeric_bounds();
    return out;
}

}  // namespace tabsynth

#endif
