#ifndef TABSYNTH_GMM_HPP
#define TABSYNTH_GMM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/stats.hpp"

namespace tabsynth {

struct GaussianMixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> stds;
    double sigma_floor = 0.0;

    std::size_t k() const { return weights.size(); }
};

inline double gaussian_log_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.9189385332046727;  // log sqrt(2 pi)
}

// Posterior component probabilities for one observation; sums to 1.
inline std::vector<double> gmm_responsibilities(const GaussianMixture& mix, double x) {
    std::vector<double> logp(mix.k());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < mix.k(); ++j) {
        logp[j] = std::log(mix.weights[j]) + gaussian_log_pdf(x, mix.means[j], mix.stds[j]);
        mx = std::max(mx, logp[j]);
    }
    double z = 0.0;
    for (double& v : logp) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : logp) v /= z;
    return logp;
}

inline std::size_t gmm_most_likely_component(const GaussianMixture& mix, double x) {
    const auto r = gmm_responsibilities(mix, x);
    return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

// EM fit of a univariate Gaussian mixture. Centers are seeded k-means++
// style from the rng, then EM runs to convergence (log-likelihood
// improvement < 1e-6, at most 200 iterations). Components lighter than
// 1e-3 are pruned afterwards and the weights renormalized. Standard
// deviations are floored at 1e-6 of the data range.
//
// `ll_trace`, when given, receives the log-likelihood after every
// iteration (non-decreasing by the EM guarantee).
inline GaussianMixture gmm_fit_em(std::span<const double> values, std::size_t max_k,
                                  DeterministicRng& rng,
                                  std::vector<double>* ll_trace = nullptr) {
    if (values.empty()) throw ContractError("gmm_fit_em: empty input");
    const std::size_t n = values.size();

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    const double range = sorted.back() - sorted.front();
    const double sigma_floor = std::max(1e-6 * range, 1e-9);
    const std::size_t k = std::max<std::size_t>(1, std::min(max_k, distinct.size()));

    GaussianMixture mix;
    mix.sigma_floor = sigma_floor;
    mix.weights.assign(k, 1.0 / static_cast<double>(k));
    mix.stds.assign(k, std::max(sample_std(values), sigma_floor));

    // k-means++ seeding over the distinct values
    mix.means.reserve(k);
    mix.means.push_back(distinct[rng.bounded(distinct.size())]);
    std::vector<double> d2(distinct.size());
    while (mix.means.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < distinct.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : mix.means) best = std::min(best, (distinct[i] - c) * (distinct[i] - c));
            d2[i] = best;
            total += best;
        }
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        for (; pick + 1 < distinct.size(); ++pick) {
            u -= d2[pick];
            if (u <= 0.0) break;
        }
        mix.means.push_back(distinct[pick]);
    }
    std::sort(mix.means.begin(), mix.means.end());

    std::vector<double> resp(n * k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        // E-step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double lp =
                    std::log(mix.weights[j]) + gaussian_log_pdf(values[i], mix.means[j], mix.stds[j]);
                resp[i * k + j] = lp;
                mx = std::max(mx, lp);
            }
            double z = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                resp[i * k + j] = std::exp(resp[i * k + j] - mx);
                z += resp[i * k + j];
            }
            for (std::size_t j = 0; j < k; ++j) resp[i * k + j] /= z;
            ll += mx + std::log(z);
        }
        if (ll_trace) ll_trace->push_back(ll);
        if (ll - prev_ll < 1e-6 && iter > 0) break;
        prev_ll = ll;

        // M-step
        for (std::size_t j = 0; j < k; ++j) {
            double nj = 0.0, sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nj += resp[i * k + j];
                sum += resp[i * k + j] * values[i];
            }
            if (nj < 1e-12) continue;  // dead component, leave parameters alone
            const double mu = sum / nj;
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                ss += resp[i * k + j] * (values[i] - mu) * (values[i] - mu);
            mix.weights[j] = nj / static_cast<double>(n);
            mix.means[j] = mu;
            mix.stds[j] = std::max(std::sqrt(ss / nj), sigma_floor);
        }
        double wz = 0.0;
        for (double w : mix.weights) wz += w;
        for (double& w : mix.weights) w /= wz;
    }

    // prune negligible components, renormalize
    GaussianMixture pruned;
    pruned.sigma_floor = sigma_floor;
    for (std::size_t j = 0; j < k; ++j) {
        if (mix.weights[j] >= 1e-3) {
            pruned.weights.push_back(mix.weights[j]);
            pruned.means.push_back(mix.means[j]);
            pruned.stds.push_back(mix.stds[j]);
        }
    }
    if (pruned.weights.empty()) {
        pruned.weights = {1.0};
        pruned.means = {mix.means.front()};
        pruned.stds = {std::max(mix.stds.front(), sigma_floor)};
    }
    double wz = 0.0;
    for (double w : pruned.weights) wz += w;
    for (double& w : pruned.weights) w /= wz;
    return pruned;
}

}  // namespace tabsynth

#endif
