#ifndef TABSYNTH_EVALUATION_HPP
#define TABSYNTH_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/regressors.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/stats.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

// ---------------------------------------------------------------------------
// Statistical similarity (0-100)

struct ColumnScore {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    // numeric sub-metrics, each clamped to [0,1]
    double d_mean = 0.0, d_median = 0.0, d_std = 0.0, ks = 0.0, w_norm = 0.0;
    // categorical sub-metrics
    double mode_match = 0.0, mode_freq_diff = 0.0;
    double score = 0.0;
};

struct SimilarityReport {
    std::vector<ColumnScore> columns;
    double dataset_score = 0.0;  // 100 * mean column score
};

namespace detail {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline std::map<std::string, double> label_frequencies(const Table& t, std::size_t c) {
    std::map<std::string, double> freq;
    const auto& cells = t.categorical(c);
    const double n = static_cast<double>(cells.size());
    for (auto idx : cells)
        freq[t.schema[c].categories[static_cast<std::size_t>(idx)]] += 1.0 / n;
    return freq;
}

// most frequent category; ties break toward the lower schema index
inline std::string mode_label(const Table& t, std::size_t c) {
    std::vector<double> counts(t.schema[c].categories.size(), 0.0);
    for (auto idx : t.categorical(c)) counts[static_cast<std::size_t>(idx)] += 1.0;
    std::size_t best = 0;
    for (std::size_t j = 1; j < counts.size(); ++j)
        if (counts[j] > counts[best]) best = j;
    return t.schema[c].categories[best];
}

}  // namespace detail

inline ColumnScore column_similarity(const Table& real, const Table& synth, std::size_t c) {
    if (real.schema[c].kind != synth.schema[c].kind)
        throw SchemaError("column_similarity: kind mismatch on '" + real.schema[c].name + "'");
    if (real.n_rows() == 0 || synth.n_rows() == 0)
        throw ContractError("column_similarity: empty column");

    ColumnScore cs;
    cs.name = real.schema[c].name;
    cs.kind = real.schema[c].kind;

    if (cs.kind == ColumnKind::Numeric) {
        const auto& a = real.numeric(c);
        const auto& b = synth.numeric(c);
        const auto [mn, mx] = std::minmax_element(a.begin(), a.end());
        double range = *mx - *mn;
        if (range <= 0.0) range = 1.0;
        cs.d_mean = detail::clamp01(std::abs(mean_of(a) - mean_of(b)) / range);
        cs.d_median = detail::clamp01(std::abs(median_of(a) - median_of(b)) / range);
        cs.d_std = detail::clamp01(std::abs(sample_std(a) - sample_std(b)) /
                                   std::max(sample_std(a), 1e-12));
        cs.ks = ks_statistic(a, b);
        cs.w_norm = detail::clamp01(wasserstein_1d(a, b) / range);
        cs.score = 1.0 - (cs.d_mean + cs.d_median + cs.d_std + cs.ks + cs.w_norm) / 5.0;
    } else {
        const std::string real_mode = detail::mode_label(real, c);
        const std::string synth_mode = detail::mode_label(synth, c);
        const auto real_freq = detail::label_frequencies(real, c);
        auto synth_freq = detail::label_frequencies(synth, c);
        cs.mode_match = real_mode == synth_mode ? 1.0 : 0.0;
        cs.mode_freq_diff = std::abs(real_freq.at(real_mode) - synth_freq[real_mode]);
        cs.score = 0.5 * cs.mode_match + 0.5 * (1.0 - cs.mode_freq_diff);
    }
    return cs;
}

inline SimilarityReport similarity_score(const Table& real, const Table& synth) {
    if (!schema_compatible(real.schema, synth.schema))
        throw SchemaError("similarity_score: schemas do not match");
    SimilarityReport report;
    double total = 0.0;
    for (std::size_t c = 0; c < real.n_cols(); ++c) {
        report.columns.push_back(column_similarity(real, synth, c));
        total += report.columns.back().score;
    }
    report.dataset_score = 100.0 * total / static_cast<double>(real.n_cols());
    return report;
}

// ---------------------------------------------------------------------------
// Regression metrics

struct RegressionMetrics {
    double mae = 0.0;
    double mse = 0.0;
    double r2 = 0.0;
};

inline RegressionMetrics regression_metrics(std::span<const double> y,
                                            std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw ContractError("regression_metrics: length mismatch");
    if (y.size() < 2) throw ContractError("regression_metrics: need at least 2 points");
    const double n = static_cast<double>(y.size());
    RegressionMetrics m;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        m.mae += std::abs(e);
        m.mse += e * e;
        ss_res += e * e;
    }
    m.mae /= n;
    m.mse /= n;
    const double mu = mean_of(y);
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mu) * (v - mu);
    m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// Feature construction: numeric columns pass through, categorical columns
// one-hot encode against the reference (real-train) schema. Labels the
// reference never saw map to the all-zero block.

struct FeatureBuilder {
    std::vector<ColumnSchema> ref;
    std::size_t width = 0;

    explicit FeatureBuilder(const std::vector<ColumnSchema>& reference) : ref(reference) {
        for (const auto& cs : ref)
            width += cs.kind == ColumnKind::Numeric ? 1 : cs.categories.size();
    }

    Matrix build(const Table& t) const {
        if (!schema_compatible(t.schema, ref))
            throw SchemaError("FeatureBuilder: table does not match the reference schema");
        Matrix x(t.n_rows(), width);
        std::size_t offset = 0;
        for (std::size_t c = 0; c < ref.size(); ++c) {
            if (ref[c].kind == ColumnKind::Numeric) {
                const auto& v = t.numeric(c);
                for (std::size_t r = 0; r < v.size(); ++r) x(r, offset) = v[r];
                ++offset;
            } else {
                // map this table's category indices onto reference positions
                std::vector<std::ptrdiff_t> remap(t.schema[c].categories.size(), -1);
                for (std::size_t j = 0; j < t.schema[c].categories.size(); ++j) {
                    const auto& label = t.schema[c].categories[j];
                    const auto it = std::find(ref[c].categories.begin(), ref[c].categories.end(),
                                              label);
                    if (it != ref[c].categories.end())
                        remap[j] = it - ref[c].categories.begin();
                }
                const auto& v = t.categorical(c);
                for (std::size_t r = 0; r < v.size(); ++r) {
                    const auto pos = remap[static_cast<std::size_t>(v[r])];
                    if (pos >= 0) x(r, offset + static_cast<std::size_t>(pos)) = 1.0;
                }
                offset += ref[c].categories.size();
            }
        }
        return x;
    }
};

// ---------------------------------------------------------------------------
// TSTR: train on synthetic, test on real.

struct UtilityCell {
    RegressionMetrics real;
    RegressionMetrics synth;
};

struct UtilityReport {
    std::vector<std::string> regressor_names;
    // cells[repetition][regressor]
    std::vector<std::vector<UtilityCell>> cells;
    RegressionMetrics avg_real;
    RegressionMetrics avg_synth;
    double diff_mae = 0.0, diff_mse = 0.0, diff_r2 = 0.0;
    double score_mae = 0.0, score_mse = 0.0, score_r2 = 0.0;
    double overall_score = 0.0;
};

struct TstrOptions {
    // the synthetic training subset is capped at |real train| * ratio rows
    double synthetic_ratio = 1.0;
};

inline std::vector<RegressorSpec> default_regressor_specs() {
    return {RegressorSpec{.kind = RegressorKind::LinearRidge},
            RegressorSpec{.kind = RegressorKind::RandomForest},
            RegressorSpec{.kind = RegressorKind::GradientBoostedTrees},
            RegressorSpec{.kind = RegressorKind::Knn}};
}

inline UtilityReport tstr_run(const Table& real, const Table& synth, const std::string& target,
                              const std::vector<RegressorSpec>& specs, const SplitSpec& split,
                              const TstrOptions& opts = {}) {
    const auto target_real = real.column_index(target);
    const auto target_synth = synth.column_index(target);
    if (!target_real || !target_synth)
        throw SchemaError("tstr_run: target column '" + target + "' missing");
    if (real.schema[*target_real].kind != ColumnKind::Numeric ||
        synth.schema[*target_synth].kind != ColumnKind::Numeric)
        throw SchemaError("tstr_run: target column must be numeric");
    if (!schema_compatible(real.schema, synth.schema))
        throw SchemaError("tstr_run: real and synthetic schemas do not match");

    UtilityReport report;
    for (const auto& spec : specs) report.regressor_names.push_back(regressor_name(spec.kind));

    for (std::size_t rep = 0; rep < split.repetitions; ++rep) {
        const auto [train, test] = train_test_split(real, split, rep);
        const Table train_features = train.drop_column(*target_real);
        const Table test_features = test.drop_column(*target_real);
        const auto& y_train = train.numeric(*target_real);
        const auto& y_test = test.numeric(*target_real);

        const ScalerParams scaler = standardize_fit(train_features);
        const FeatureBuilder builder(train_features.schema);
        const Matrix x_train = builder.build(standardize_apply(train_features, scaler));
        const Matrix x_test = builder.build(standardize_apply(test_features, scaler));

        // synthetic training subset: the synthetic table goes through the
        // same repeated-holdout split, and its train side is capped at
        // |real train| * ratio rows. A synthetic table that is an exact
        // copy of the real one therefore reproduces the real training set.
        const std::size_t cap = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::llround(static_cast<double>(train.n_rows()) *
                                                     opts.synthetic_ratio)));
        const auto [synth_train, synth_unused] = train_test_split(synth, split, rep);
        const Table synth_subset = synth_train.head(cap).drop_column(*target_synth);
        std::vector<double> y_synth = synth_train.numeric(*target_synth);
        if (y_synth.size() > cap) y_synth.resize(cap);
        const Matrix x_synth = builder.build(standardize_apply(synth_subset, scaler));

        report.cells.emplace_back();
        for (const auto& spec : specs) {
            const std::string name = regressor_name(spec.kind);
            UtilityCell cell;
            {
                DeterministicRng rng(
                    derive_seed(split.seed, "tstr-fit-real", std::to_string(rep) + ":" + name));
                const auto model = fit_regressor(spec, x_train, y_train, rng);
                cell.real = regression_metrics(y_test, model->predict(x_test));
            }
            {
                DeterministicRng rng(
                    derive_seed(split.seed, "tstr-fit-synth", std::to_string(rep) + ":" + name));
                const auto model = fit_regressor(spec, x_synth, y_synth, rng);
                cell.synth = regression_metrics(y_test, model->predict(x_test));
            }
            report.cells.back().push_back(cell);
        }
    }

    const double n_cells = static_cast<double>(split.repetitions * specs.size());
    for (const auto& row : report.cells)
        for (const auto& cell : row) {
            report.avg_real.mae += cell.real.mae / n_cells;
            report.avg_real.mse += cell.real.mse / n_cells;
            report.avg_real.r2 += cell.real.r2 / n_cells;
            report.avg_synth.mae += cell.synth.mae / n_cells;
            report.avg_synth.mse += cell.synth.mse / n_cells;
            report.avg_synth.r2 += cell.synth.r2 / n_cells;
        }

    const auto rel_diff = [](double synth_v, double real_v) {
        return std::abs(synth_v - real_v) / std::max(std::abs(real_v), 1e-8);
    };
    report.diff_mae = rel_diff(report.avg_synth.mae, report.avg_real.mae);
    report.diff_mse = rel_diff(report.avg_synth.mse, report.avg_real.mse);
    report.diff_r2 = rel_diff(report.avg_synth.r2, report.avg_real.r2);
    report.score_mae = 1.0 - report.diff_mae;
    report.score_mse = 1.0 - report.diff_mse;
    report.score_r2 = 1.0 - report.diff_r2;
    report.overall_score = (report.score_mae + report.score_mse + report.score_r2) / 3.0;
    return report;
}

}  // namespace tabsynth

#endif
