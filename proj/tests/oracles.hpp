// Independent reference implementations used only by tests. These stay
// deliberately naive (double loops, fine grids, finite differences) so a
// bug in the library cannot hide in a shared code path.
#ifndef TABSYNTH_TESTS_ORACLES_HPP
#define TABSYNTH_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

namespace oracles {

// Brute-force two-sample KS: evaluate both step ECDFs at every pooled
// sample point and take the max difference.
inline double ks_brute_force(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    double sup = 0.0;
    for (double t : pooled) {
        double fa = 0.0, fb = 0.0;
        for (double x : a)
            if (x <= t) fa += 1.0;
        for (double x : b)
            if (x <= t) fb += 1.0;
        sup = std::max(sup, std::abs(fa / static_cast<double>(a.size()) -
                                     fb / static_cast<double>(b.size())));
    }
    return sup;
}

// W1 by integrating |Qa - Qb| over a grid of n*m equal steps; the step
// quantile functions are constant on each subinterval, so this is exact.
inline double wasserstein_brute_force(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t cells = sa.size() * sb.size();
    double total = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(cells);
        const double qa = sa[std::min(sa.size() - 1,
                                      static_cast<std::size_t>(u * static_cast<double>(sa.size())))];
        const double qb = sb[std::min(sb.size() - 1,
                                      static_cast<std::size_t>(u * static_cast<double>(sb.size())))];
        total += std::abs(qa - qb);
    }
    return total / static_cast<double>(cells);
}

// Central-difference gradient of a scalar function of a parameter vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> params,
    double eps = 1e-5) {
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double up = f(params);
        params[i] = saved - eps;
        const double down = f(params);
        params[i] = saved;
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

inline double gradient_relative_error(std::span<const double> analytic,
                                      std::span<const double> numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

// Small random mixed-kind table for property tests.
inline tabsynth::Table random_table(tabsynth::DeterministicRng& rng, std::size_t n_rows,
                                    std::size_t n_numeric, std::size_t n_categorical) {
    tabsynth::Table t;
    for (std::size_t c = 0; c < n_numeric; ++c) {
        tabsynth::ColumnSchema cs;
        cs.name = "num" + std::to_string(c);
        cs.kind = tabsynth::ColumnKind::Numeric;
        tabsynth::NumericColumn v(n_rows);
        const double scale = 1.0 + 10.0 * rng.uniform();
        const double shift = rng.uniform(-5.0, 5.0);
        for (double& x : v) x = shift + scale * rng.normal();
        t.schema.push_back(cs);
        t.columns.emplace_back(std::move(v));
    }
    for (std::size_t c = 0; c < n_categorical; ++c) {
        tabsynth::ColumnSchema cs;
        cs.name = "cat" + std::to_string(c);
        cs.kind = tabsynth::ColumnKind::Categorical;
        const std::size_t k = 2 + rng.bounded(4);
        for (std::size_t j = 0; j < k; ++j) cs.categories.push_back("v" + std::to_string(j));
        tabsynth::CategoricalColumn v(n_rows);
        for (auto& x : v) x = static_cast<std::int32_t>(rng.bounded(k));
        t.schema.push_back(cs);
        t.columns.emplace_back(std::move(v));
    }
    t.refresh_numeric_bounds();
    return t;
}

}  // namespace oracles

#endif
