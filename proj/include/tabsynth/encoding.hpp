#ifndef TABSYNTH_ENCODING_HPP
#define TABSYNTH_ENCODING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/gmm.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

// Mode-specific normalization: each numeric column is described by a
// fitted Gaussian mixture and encoded as (alpha, one-hot mode) where
// alpha = (x - mu_mode) / (4 sigma_mode) clipped to [-1,1]. Categorical
// columns become plain one-hot blocks.
struct ColumnEncoding {
    ColumnKind kind = ColumnKind::Numeric;
    GaussianMixture gmm;  // numeric only
    std::size_t alpha_col = 0;
    std::size_t onehot_begin = 0;
    std::size_t onehot_size = 0;
};

// A one-hot block the conditional generator may condition on; mode blocks
// and categorical blocks are treated alike. counts hold the training
// frequency of each category/mode.
struct DiscreteBlock {
    std::size_t column = 0;
    bool is_mode_block = false;
    std::size_t begin = 0;
    std::size_t size = 0;
    std::vector<double> counts;
};

struct TableEncoding {
    std::vector<ColumnSchema> schema;
    std::vector<ColumnEncoding> columns;
    std::vector<DiscreteBlock> discrete_blocks;
    std::size_t width = 0;
};

inline TableEncoding msn_fit(const Table& t, std::size_t max_k, DeterministicRng& rng) {
    TableEncoding enc;
    enc.schema = t.schema;
    enc.columns.resize(t.n_cols());
    std::size_t offset = 0;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        ColumnEncoding& ce = enc.columns[c];
        ce.kind = t.schema[c].kind;
        if (ce.kind == ColumnKind::Numeric) {
            auto col_rng = rng.fork(c);
            ce.gmm = gmm_fit_em(t.numeric(c), max_k, col_rng);
            ce.alpha_col = offset++;
            ce.onehot_begin = offset;
            ce.onehot_size = ce.gmm.k();
            offset += ce.onehot_size;

            DiscreteBlock block;
            block.column = c;
            block.is_mode_block = true;
            block.begin = ce.onehot_begin;
            block.size = ce.onehot_size;
            block.counts.assign(ce.onehot_size, 0.0);
            for (double x : t.numeric(c)) block.counts[gmm_most_likely_component(ce.gmm, x)] += 1.0;
            enc.discrete_blocks.push_back(std::move(block));
        } else {
            ce.onehot_begin = offset;
            ce.onehot_size = t.schema[c].categories.size();
            offset += ce.onehot_size;

            DiscreteBlock block;
            block.column = c;
            block.is_mode_block = false;
            block.begin = ce.onehot_begin;
            block.size = ce.onehot_size;
            block.counts.assign(ce.onehot_size, 0.0);
            for (auto idx : t.categorical(c)) block.counts[static_cast<std::size_t>(idx)] += 1.0;
            enc.discrete_blocks.push_back(std::move(block));
        }
    }
    enc.width = offset;
    return enc;
}

inline Matrix msn_encode(const Table& t, const TableEncoding& enc) {
    if (!schema_compatible(t.schema, enc.schema))
        throw SchemaError("msn_encode: table does not match the fitted encoding");
    const std::size_t n = t.n_rows();
    Matrix out(n, enc.width);
    for (std::size_t c = 0; c < enc.columns.size(); ++c) {
        const ColumnEncoding& ce = enc.columns[c];
        if (ce.kind == ColumnKind::Numeric) {
            const auto& v = t.numeric(c);
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t mode = gmm_most_likely_component(ce.gmm, v[r]);
                const double alpha =
                    (v[r] - ce.gmm.means[mode]) / (4.0 * ce.gmm.stds[mode]);
                out(r, ce.alpha_col) = std::clamp(alpha, -1.0, 1.0);
                out(r, ce.onehot_begin + mode) = 1.0;
            }
        } else {
            const auto& v = t.categorical(c);
            for (std::size_t r = 0; r < n; ++r)
                out(r, ce.onehot_begin + static_cast<std::size_t>(v[r])) = 1.0;
        }
    }
    return out;
}

// Inverts the encoding. One-hot blocks resolve by argmax by default; with
// sample_onehot the block is treated as a probability vector and sampled.
inline Table msn_decode(const Matrix& m, const TableEncoding& enc, DeterministicRng& rng,
                        bool sample_onehot = false) {
    if (m.cols() != enc.width) throw ContractError("msn_decode: width mismatch");
    const std::size_t n = m.rows();

    auto pick = [&](const double* row, std::size_t begin, std::size_t size) -> std::size_t {
        if (size == 1) return 0;
        if (sample_onehot) {
            double total = 0.0;
            for (std::size_t j = 0; j < size; ++j) total += std::max(row[begin + j], 0.0);
            if (total > 0.0) {
                double u = rng.uniform() * total;
                for (std::size_t j = 0; j + 1 < size; ++j) {
                    u -= std::max(row[begin + j], 0.0);
                    if (u < 0.0) return j;
                }
                return size - 1;
            }
        }
        std::size_t best = 0;
        for (std::size_t j = 1; j < size; ++j)
            if (row[begin + j] > row[begin + best]) best = j;
        return best;
    };

    Table out;
    out.schema = enc.schema;
    out.columns.resize(enc.columns.size());
    for (std::size_t c = 0; c < enc.columns.size(); ++c) {
        const ColumnEncoding& ce = enc.columns[c];
        if (ce.kind == ColumnKind::Numeric) {
            NumericColumn v(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double* row = m.row_ptr(r);
                const std::size_t mode = pick(row, ce.onehot_begin, ce.onehot_size);
                const double alpha = std::clamp(row[ce.alpha_col], -1.0, 1.0);
                v[r] = alpha * 4.0 * ce.gmm.stds[mode] + ce.gmm.means[mode];
            }
            out.columns[c] = std::move(v);
        } else {
            CategoricalColumn v(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double* row = m.row_ptr(r);
                v[r] = static_cast<std::int32_t>(pick(row, ce.onehot_begin, ce.onehot_size));
            }
            out.columns[c] = std::move(v);
        }
    }
    out.refresh_numeric_bounds();
    return out;
}

}  // namespace tabsynth

#endif
