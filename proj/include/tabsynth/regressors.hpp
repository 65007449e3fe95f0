#ifndef TABSYNTH_REGRESSORS_HPP
#define TABSYNTH_REGRESSORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

enum class RegressorKind { LinearRidge, RandomForest, GradientBoostedTrees, Knn };

inline std::string regressor_name(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::LinearRidge: return "linear_ridge";
        case RegressorKind::RandomForest: return "random_forest";
        case RegressorKind::GradientBoostedTrees: return "gradient_boosted_trees";
        case RegressorKind::Knn: return "knn";
    }
    return "unknown";
}

struct RegressorSpec {
    RegressorKind kind = RegressorKind::LinearRidge;

    double ridge_lambda = 1e-6;

    std::size_t rf_trees = 100;
    std::size_t rf_max_depth = 12;
    std::size_t rf_min_leaf = 5;

    std::size_t gbt_rounds = 100;
    std::size_t gbt_depth = 3;
    double gbt_shrinkage = 0.1;
    std::size_t gbt_min_leaf = 1;

    std::size_t knn_k = 10;

    void validate() const {
        if (ridge_lambda <= 0.0) throw ContractError("RegressorSpec: ridge_lambda must be > 0");
        if (rf_trees < 1 || gbt_rounds < 1 || knn_k < 1 || rf_min_leaf < 1 || gbt_min_leaf < 1)
            throw ContractError("RegressorSpec: counts must be >= 1");
        if (gbt_shrinkage <= 0.0) throw ContractError("RegressorSpec: shrinkage must be > 0");
    }
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<double> predict(const Matrix& x) const = 0;
};

// ---------------------------------------------------------------------------
// CART regression tree shared by the forest and the boosting machine.

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

class RegressionTree {
public:
    // rows: indices into x/y this tree trains on (bootstrap sample for the
    // forest). candidates_per_split == 0 means all features.
    void fit(const Matrix& x, const std::vector<double>& y, std::vector<std::size_t> rows,
             std::size_t max_depth, std::size_t min_leaf, std::size_t candidates_per_split,
             DeterministicRng& rng) {
        nodes_.clear();
        grow(x, y, std::move(rows), max_depth, min_leaf, candidates_per_split, rng);
    }

    double predict_row(const double* row) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
            node = row[n.feature] < n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].value;
    }

private:
    int grow(const Matrix& x, const std::vector<double>& y, std::vector<std::size_t> rows,
             std::size_t depth_left, std::size_t min_leaf, std::size_t candidates,
             DeterministicRng& rng) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double sum = 0.0;
        for (std::size_t r : rows) sum += y[r];
        nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());

        if (depth_left == 0 || rows.size() < 2 * min_leaf) return id;

        const std::size_t d = x.cols();
        std::vector<std::size_t> features(d);
        std::iota(features.begin(), features.end(), 0);
        std::size_t n_try = d;
        if (candidates > 0 && candidates < d) {
            // partial Fisher-Yates: first `candidates` entries become the draw
            for (std::size_t i = 0; i < candidates; ++i) {
                const std::size_t j = i + rng.bounded(d - i);
                std::swap(features[i], features[j]);
            }
            n_try = candidates;
        }

        double best_gain = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        const double total_sum = sum;
        const double n_total = static_cast<double>(rows.size());

        std::vector<std::pair<double, double>> vals(rows.size());  // (x_f, y)
        for (std::size_t fi = 0; fi < n_try; ++fi) {
            const std::size_t f = features[fi];
            for (std::size_t i = 0; i < rows.size(); ++i)
                vals[i] = {x(rows[i], f), y[rows[i]]};
            std::sort(vals.begin(), vals.end());
            double left_sum = 0.0;
            for (std::size_t i = 1; i < vals.size(); ++i) {
                left_sum += vals[i - 1].second;
                if (vals[i].first == vals[i - 1].first) continue;
                const std::size_t nl = i, nr = vals.size() - i;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double right_sum = total_sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(nl) +
                                    right_sum * right_sum / static_cast<double>(nr) -
                                    total_sum * total_sum / n_total;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = vals[i - 1].first + (vals[i].first - vals[i - 1].first) / 2.0;
                }
            }
        }
        if (best_gain <= 0.0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (x(r, best_feature) < best_threshold ? left_rows : right_rows).push_back(r);
        if (left_rows.size() < min_leaf || right_rows.size() < min_leaf) return id;

        rows.clear();
        rows.shrink_to_fit();
        nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(best_feature);
        nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int left = grow(x, y, std::move(left_rows), depth_left - 1, min_leaf, candidates, rng);
        nodes_[static_cast<std::size_t>(id)].left = left;
        const int right = grow(x, y, std::move(right_rows), depth_left - 1, min_leaf, candidates, rng);
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------

class LinearRidgePredictor final : public Predictor {
public:
    LinearRidgePredictor(const Matrix& x, const std::vector<double>& y, double lambda) {
        const std::size_t n = x.rows(), d = x.cols();
        x_mean_.assign(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) x_mean_[c] += x(r, c);
        for (double& m : x_mean_) m /= static_cast<double>(n);
        y_mean_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

        Matrix xc(n, d);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) xc(r, c) = x(r, c) - x_mean_[c];
        Matrix gram = matmul_at_b(xc, xc);
        for (std::size_t c = 0; c < d; ++c) gram(c, c) += lambda;

        std::vector<double> rhs(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) rhs[c] += xc(r, c) * (y[r] - y_mean_);

        // solve via Cholesky; lambda > 0 keeps the system positive definite
        const Matrix l = cholesky(gram);
        std::vector<double> tmp(d);
        for (std::size_t i = 0; i < d; ++i) {
            double s = rhs[i];
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * tmp[k];
            tmp[i] = s / l(i, i);
        }
        coef_.assign(d, 0.0);
        for (std::size_t i = d; i-- > 0;) {
            double s = tmp[i];
            for (std::size_t k = i + 1; k < d; ++k) s -= l(k, i) * coef_[k];
            coef_[i] = s / l(i, i);
        }
        intercept_ = y_mean_;
        for (std::size_t c = 0; c < d; ++c) intercept_ -= coef_[c] * x_mean_[c];
    }

    std::vector<double> predict(const Matrix& x) const override {
        std::vector<double> out(x.rows(), intercept_);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* row = x.row_ptr(r);
            for (std::size_t c = 0; c < coef_.size(); ++c) out[r] += coef_[c] * row[c];
        }
        return out;
    }

    const std::vector<double>& coefficients() const { return coef_; }
    double intercept() const { return intercept_; }

private:
    std::vector<double> coef_;
    std::vector<double> x_mean_;
    double y_mean_ = 0.0;
    double intercept_ = 0.0;
};

class RandomForestPredictor final : public Predictor {
public:
    RandomForestPredictor(const Matrix& x, const std::vector<double>& y, const RegressorSpec& spec,
                          DeterministicRng& rng) {
        const std::size_t n = x.rows();
        const std::size_t candidates = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
        trees_.resize(spec.rf_trees);
        for (auto& tree : trees_) {
            std::vector<std::size_t> bootstrap(n);
            for (auto& r : bootstrap) r = rng.bounded(n);
            tree.fit(x, y, std::move(bootstrap), spec.rf_max_depth, spec.rf_min_leaf, candidates,
                     rng);
        }
    }

    std::vector<double> predict(const Matrix& x) const override {
        std::vector<double> out(x.rows(), 0.0);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double s = 0.0;
            for (const auto& t : trees_) s += t.predict_row(x.row_ptr(r));
            out[r] = s / static_cast<double>(trees_.size());
        }
        return out;
    }

    std::vector<double> tree_predictions(const double* row) const {
        std::vector<double> out;
        out.reserve(trees_.size());
        for (const auto& t : trees_) out.push_back(t.predict_row(row));
        return out;
    }

private:
    std::vector<RegressionTree> trees_;
};

class GradientBoostedPredictor final : public Predictor {
public:
    GradientBoostedPredictor(const Matrix& x, const std::vector<double>& y,
                             const RegressorSpec& spec, DeterministicRng& rng) {
        const std::size_t n = x.rows();
        base_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        shrinkage_ = spec.gbt_shrinkage;
        std::vector<double> residual(n);
        for (std::size_t r = 0; r < n; ++r) residual[r] = y[r] - base_;
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        trees_.resize(spec.gbt_rounds);
        for (auto& tree : trees_) {
            tree.fit(x, residual, all, spec.gbt_depth, spec.gbt_min_leaf, 0, rng);
            for (std::size_t r = 0; r < n; ++r)
                residual[r] -= shrinkage_ * tree.predict_row(x.row_ptr(r));
        }
    }

    std::vector<double> predict(const Matrix& x) const override {
        std::vector<double> out(x.rows(), base_);
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (const auto& t : trees_) out[r] += shrinkage_ * t.predict_row(x.row_ptr(r));
        return out;
    }

private:
    std::vector<RegressionTree> trees_;
    double base_ = 0.0;
    double shrinkage_ = 0.1;
};

// k nearest neighbours, Euclidean over internally standardized features.
class KnnPredictor final : public Predictor {
public:
    KnnPredictor(const Matrix& x, const std::vector<double>& y, std::size_t k)
        : k_(std::min(k, x.rows())), y_(y) {
        const std::size_t n = x.rows(), d = x.cols();
        mean_.assign(d, 0.0);
        std_.assign(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) mean_[c] += x(r, c);
        for (double& m : mean_) m /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                const double dlt = x(r, c) - mean_[c];
                std_[c] += dlt * dlt;
            }
        for (double& s : std_) s = n > 1 ? std::sqrt(s / static_cast<double>(n - 1)) : 0.0;
        train_ = Matrix(n, d);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c)
                train_(r, c) = std_[c] > 0.0 ? (x(r, c) - mean_[c]) / std_[c] : 0.0;
    }

    std::vector<double> predict(const Matrix& x) const override {
        const std::size_t n = train_.rows(), d = train_.cols();
        std::vector<double> out(x.rows(), 0.0);
        std::vector<std::pair<double, std::size_t>> dist(n);
        std::vector<double> q(d);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < d; ++c)
                q[c] = std_[c] > 0.0 ? (x(r, c) - mean_[c]) / std_[c] : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = train_.row_ptr(i);
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double dlt = q[c] - row[c];
                    s += dlt * dlt;
                }
                dist[i] = {s, i};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
                              dist.end());
            double s = 0.0;
            for (std::size_t i = 0; i < k_; ++i) s += y_[dist[i].second];
            out[r] = s / static_cast<double>(k_);
        }
        return out;
    }

private:
    std::size_t k_;
    Matrix train_;
    std::vector<double> y_;
    std::vector<double> mean_, std_;
};

inline std::unique_ptr<Predictor> fit_regressor(const RegressorSpec& spec, const Matrix& x,
                                                const std::vector<double>& y,
                                                DeterministicRng& rng) {
    spec.validate();
    if (x.rows() < 2 || x.rows() != y.size())
        throw ContractError("fit_regressor: need >= 2 training rows and matching target length");
    switch (spec.kind) {
        case RegressorKind::LinearRidge:
            return std::make_unique<LinearRidgePredictor>(x, y, spec.ridge_lambda);
        case RegressorKind::RandomForest:
            return std::make_unique<RandomForestPredictor>(x, y, spec, rng);
        case RegressorKind::GradientBoostedTrees:
            return std::make_unique<GradientBoostedPredictor>(x, y, spec, rng);
        case RegressorKind::Knn:
            return std::make_unique<KnnPredictor>(x, y, spec.knn_k);
    }
    throw ContractError("fit_regressor: unknown kind");
}

}  // namespace tabsynth

#endif
