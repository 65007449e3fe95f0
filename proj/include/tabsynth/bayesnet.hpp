#ifndef TABSYNTH_BAYESNET_HPP
#define TABSYNTH_BAYESNET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/stats.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

// Per-numeric-column equal-frequency bin edges. edges.front() is the
// observed min, edges.back() the observed max; interior edges fall at
// midpoints between adjacent distinct values, with duplicates merged.
struct Discretizer {
    // empty vector means the column is categorical and passes through
    std::vector<std::vector<double>> edges;

    std::size_t n_bins(std::size_t column) const {
        return edges[column].empty() ? 0 : edges[column].size() - 1;
    }

    std::int32_t bin_of(std::size_t column, double x) const {
        const auto& e = edges[column];
        if (e.size() <= 2) return 0;
        auto it = std::upper_bound(e.begin() + 1, e.end() - 1, x);
        return static_cast<std::int32_t>(it - (e.begin() + 1));
    }
};

struct DiscreteTable {
    std::vector<std::size_t> domain_sizes;          // per column
    std::vector<CategoricalColumn> columns;
    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Greedy equal-frequency binning over distinct values: close a bin as
// soon as the cumulative count reaches the next n/bins target. Skewed
// duplicates therefore merge naturally instead of producing empty bins.
inline std::vector<double> equal_frequency_edges(const NumericColumn& values, std::size_t bins) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    for (double v : sorted) {
        if (distinct.empty() || v != distinct.back()) {
            distinct.push_back(v);
            counts.push_back(1);
        } else {
            ++counts.back();
        }
    }

    std::vector<double> edges{distinct.front()};
    std::size_t cum = 0, next_target = 1;
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        cum += counts[i];
        const double target =
            static_cast<double>(next_target) * static_cast<double>(n) / static_cast<double>(bins);
        if (static_cast<double>(cum) >= target && next_target < bins) {
            double cut = distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0;
            if (!(cut > distinct[i])) cut = distinct[i + 1];
            edges.push_back(cut);
            while (static_cast<double>(cum) >= static_cast<double>(next_target) *
                                                   static_cast<double>(n) /
                                                   static_cast<double>(bins) &&
                   next_target < bins)
                ++next_target;
        }
    }
    edges.push_back(distinct.back());
    return edges;
}

inline std::pair<DiscreteTable, Discretizer> bn_discretize(const Table& t, std::size_t bins) {
    if (bins < 2) throw ContractError("bn_discretize: bins must be >= 2");
    DiscreteTable dt;
    Discretizer disc;
    disc.edges.resize(t.n_cols());
    dt.columns.resize(t.n_cols());
    dt.domain_sizes.resize(t.n_cols());
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.schema[c].kind == ColumnKind::Categorical) {
            dt.columns[c] = t.categorical(c);
            dt.domain_sizes[c] = t.schema[c].categories.size();
        } else {
            disc.edges[c] = equal_frequency_edges(t.numeric(c), bins);
            CategoricalColumn idx(t.n_rows());
            for (std::size_t r = 0; r < t.n_rows(); ++r)
                idx[r] = disc.bin_of(c, t.numeric(c)[r]);
            dt.columns[c] = std::move(idx);
            dt.domain_sizes[c] = disc.n_bins(c);
        }
    }
    return {std::move(dt), std::move(disc)};
}

// Parent list per node, -1 for roots.
using Dag = std::vector<std::int32_t>;

// Chow-Liu: maximum-mutual-information spanning tree (Prim, deterministic
// tie-breaks by column index), rooted at column 0 with edges directed
// away from the root.
inline Dag bn_learn_structure(const DiscreteTable& dt) {
    const std::size_t d = dt.columns.size();
    if (d < 2) throw ContractError("bn_learn_structure: need at least 2 columns");

    std::vector<std::vector<double>> mi(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            mi[i][j] = mi[j][i] = mutual_information(dt.columns[i], dt.columns[j]);

    Dag parent(d, -1);
    std::vector<bool> in_tree(d, false);
    std::vector<double> best_weight(d, -1.0);
    std::vector<std::int32_t> best_link(d, -1);
    in_tree[0] = true;
    for (std::size_t j = 1; j < d; ++j) {
        best_weight[j] = mi[0][j];
        best_link[j] = 0;
    }
    for (std::size_t added = 1; added < d; ++added) {
        std::size_t pick = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!in_tree[j] && best_weight[j] > best) {
                best = best_weight[j];
                pick = j;
            }
        }
        in_tree[pick] = true;
        parent[pick] = best_link[pick];
        for (std::size_t j = 0; j < d; ++j) {
            if (!in_tree[j] && mi[pick][j] > best_weight[j]) {
                best_weight[j] = mi[pick][j];
                best_link[j] = static_cast<std::int32_t>(pick);
            }
        }
    }
    return parent;
}

// One table per node: rows indexed by the parent configuration, columns by
// the node's values. Laplace alpha=1 smoothing keeps every probability
// strictly positive and gives unseen parent configurations the uniform row.
struct Cpt {
    std::size_t parent_configs = 1;
    std::size_t domain = 0;
    std::vector<double> probs;  // parent_configs x domain, rows sum to 1

    double at(std::size_t config, std::size_t value) const { return probs[config * domain + value]; }
};

inline std::vector<Cpt> bn_fit_cpts(const DiscreteTable& dt, const Dag& dag) {
    const std::size_t d = dt.columns.size();
    std::vector<Cpt> cpts(d);
    for (std::size_t c = 0; c < d; ++c) {
        const std::size_t domain = dt.domain_sizes[c];
        const std::size_t pconfigs =
            dag[c] < 0 ? 1 : dt.domain_sizes[static_cast<std::size_t>(dag[c])];
        std::vector<double> counts(pconfigs * domain, 0.0);
        for (std::size_t r = 0; r < dt.n_rows(); ++r) {
            const std::size_t config =
                dag[c] < 0 ? 0
                           : static_cast<std::size_t>(dt.columns[static_cast<std::size_t>(dag[c])][r]);
            counts[config * domain + static_cast<std::size_t>(dt.columns[c][r])] += 1.0;
        }
        Cpt& cpt = cpts[c];
        cpt.parent_configs = pconfigs;
        cpt.domain = domain;
        cpt.probs.resize(counts.size());
        for (std::size_t p = 0; p < pconfigs; ++p) {
            double total = 0.0;
            for (std::size_t v = 0; v < domain; ++v) total += counts[p * domain + v];
            for (std::size_t v = 0; v < domain; ++v)
                cpt.probs[p * domain + v] =
                    (counts[p * domain + v] + 1.0) / (total + static_cast<double>(domain));
        }
    }
    return cpts;
}

struct BayesNetModel {
    std::vector<ColumnSchema> schema;
    Dag dag;
    Discretizer discretizer;
    std::vector<std::size_t> domain_sizes;
    std::vector<Cpt> cpts;
    std::vector<std::size_t> topo_order;
};

inline std::vector<std::size_t> topological_order(const Dag& dag) {
    const std::size_t d = dag.size();
    std::vector<std::size_t> order;
    order.reserve(d);
    std::vector<bool> placed(d, false);
    for (std::size_t pass = 0; order.size() < d; ++pass) {
        if (pass > d) throw ContractError("topological_order: dag has a cycle");
        for (std::size_t c = 0; c < d; ++c) {
            if (placed[c]) continue;
            if (dag[c] < 0 || placed[static_cast<std::size_t>(dag[c])]) {
                order.push_back(c);
                placed[c] = true;
            }
        }
    }
    return order;
}

inline BayesNetModel bn_fit(const Table& t, std::size_t bins, DeterministicRng& /*rng*/) {
    if (t.n_rows() < 2) throw ContractError("bn_fit: need at least 2 rows");
    auto [dt, disc] = bn_discretize(t, bins);
    BayesNetModel model;
    model.schema = t.schema;
    model.discretizer = std::move(disc);
    model.domain_sizes = dt.domain_sizes;
    model.dag = t.n_cols() >= 2 ? bn_learn_structure(dt) : Dag{-1};
    model.cpts = bn_fit_cpts(dt, model.dag);
    model.topo_order = topological_order(model.dag);
    return model;
}

// Ancestral sampling: roots first, then children conditional on sampled
// parents. Numeric cells are reconstructed by a uniform draw inside the
// sampled bin.
inline Table bn_sample(const BayesNetModel& model, std::size_t n, DeterministicRng& rng) {
    const std::size_t d = model.schema.size();
    Table out;
    out.schema = model.schema;
    out.columns.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        if (model.schema[c].kind == ColumnKind::Numeric)
            out.columns[c] = NumericColumn(n);
        else
            out.columns[c] = CategoricalColumn(n);
    }

    std::vector<std::int32_t> states(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c : model.topo_order) {
            const Cpt& cpt = model.cpts[c];
            const std::size_t config =
                model.dag[c] < 0 ? 0 : static_cast<std::size_t>(states[static_cast<std::size_t>(model.dag[c])]);
            const double u = rng.uniform();
            double cum = 0.0;
            std::size_t value = cpt.domain - 1;
            for (std::size_t v = 0; v < cpt.domain; ++v) {
                cum += cpt.at(config, v);
                if (u < cum) {
                    value = v;
                    break;
                }
            }
            states[c] = static_cast<std::int32_t>(value);
            if (model.schema[c].kind == ColumnKind::Numeric) {
                const auto& e = model.discretizer.edges[c];
                const double lo = e[value], hi = e[value + 1];
                out.numeric(c)[r] = hi > lo ? rng.uniform(lo, hi) : lo;
            } else {
                out.categorical(c)[r] = states[c];
            }
        }
    }
    out.refresh_numeric_bounds();
    return out;
}

}  // namespace tabsynth

#endif
