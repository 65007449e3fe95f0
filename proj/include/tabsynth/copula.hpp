#ifndef TABSYNTH_COPULA_HPP
#define TABSYNTH_COPULA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/stats.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

// Maps categories onto sub-intervals of [0,1] whose widths equal the
// empirical frequencies, in schema category order. This is how a purely
// categorical column enters the continuous copula space.
class CategoricalIntervalCoder {
public:
    CategoricalIntervalCoder() = default;

    CategoricalIntervalCoder(const CategoricalColumn& cells, std::size_t n_categories) {
        std::vector<double> counts(n_categories, 0.0);
        for (auto idx : cells) counts[static_cast<std::size_t>(idx)] += 1.0;
        const double n = static_cast<double>(cells.size());
        boundaries_.resize(n_categories + 1);
        boundaries_[0] = 0.0;
        for (std::size_t j = 0; j < n_categories; ++j)
            boundaries_[j + 1] = boundaries_[j] + counts[j] / n;
        boundaries_.back() = 1.0;
    }

    explicit CategoricalIntervalCoder(std::vector<double> boundaries)
        : boundaries_(std::move(boundaries)) {}

    std::size_t n_categories() const { return boundaries_.size() - 1; }
    const std::vector<double>& boundaries() const { return boundaries_; }
    double width(std::size_t j) const { return boundaries_[j + 1] - boundaries_[j]; }

    // uniform draw inside the category's interval; keeps normal scores
    // atom-free during fitting
    double to_uniform(std::int32_t category, DeterministicRng& rng) const {
        const auto j = static_cast<std::size_t>(category);
        const double lo = boundaries_[j], hi = boundaries_[j + 1];
        if (!(hi > lo)) return std::min(std::max(lo, 1e-12), 1.0 - 1e-12);
        return rng.uniform(lo, hi);
    }

    std::int32_t from_uniform(double u) const {
        auto it = std::upper_bound(boundaries_.begin() + 1, boundaries_.end() - 1, u);
        return static_cast<std::int32_t>(it - (boundaries_.begin() + 1));
    }

private:
    std::vector<double> boundaries_;
};

using CopulaMarginal = std::variant<EmpiricalCdf, CategoricalIntervalCoder>;

struct CopulaModel {
    std::vector<ColumnSchema> schema;
    std::vector<CopulaMarginal> marginals;
    CorrelationMatrix corr;
};

// Fit: per-column marginal, cells mapped to uniforms (ECDF for numeric,
// jittered interval for categorical), uniforms to normal scores, then the
// repaired Pearson matrix of the scores.
inline CopulaModel copula_fit(const Table& t, DeterministicRng& rng) {
    if (t.n_rows() < 10) throw ContractError("copula_fit: need at least 10 rows");
    const std::size_t d = t.n_cols();
    const std::size_t n = t.n_rows();

    CopulaModel model;
    model.schema = t.schema;
    model.marginals.reserve(d);

    std::vector<std::vector<double>> scores(d, std::vector<double>(n));
    for (std::size_t c = 0; c < d; ++c) {
        if (t.schema[c].kind == ColumnKind::Numeric) {
            EmpiricalCdf cdf(t.numeric(c));
            for (std::size_t r = 0; r < n; ++r)
                scores[c][r] = normal_inv_cdf(cdf.eval(t.numeric(c)[r]));
            model.marginals.emplace_back(std::move(cdf));
        } else {
            CategoricalIntervalCoder coder(t.categorical(c), t.schema[c].categories.size());
            for (std::size_t r = 0; r < n; ++r) {
                const double u = std::clamp(coder.to_uniform(t.categorical(c)[r], rng), 1e-12,
                                            1.0 - 1e-12);
                scores[c][r] = normal_inv_cdf(u);
            }
            model.marginals.emplace_back(std::move(coder));
        }
    }
    model.corr = nearest_psd_repair(pearson_corr_matrix(scores));
    return model;
}

// Sample: correlated normals -> uniforms -> per-column inverse transform.
inline Table copula_sample(const CopulaModel& model, std::size_t n, DeterministicRng& rng) {
    const std::size_t d = model.schema.size();
    const Matrix z = mvn_sample(model.corr, n, rng);

    Table out;
    out.schema = model.schema;
    out.columns.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        if (model.schema[c].kind == ColumnKind::Numeric) {
            NumericColumn v(n);
            const auto& cdf = std::get<EmpiricalCdf>(model.marginals[c]);
            for (std::size_t r = 0; r < n; ++r) {
                const double u = std::clamp(normal_cdf(z(r, c)), 1e-15, 1.0 - 1e-15);
                v[r] = cdf.inverse(u);
            }
            out.columns[c] = std::move(v);
        } else {
            CategoricalColumn v(n);
            const auto& coder = std::get<CategoricalIntervalCoder>(model.marginals[c]);
            for (std::size_t r = 0; r < n; ++r) v[r] = coder.from_uniform(normal_cdf(z(r, c)));
            out.columns[c] = std::move(v);
        }
    }
    out.refresh_numeric_bounds();
    return out;
}

}  // namespace tabsynth

#endif
