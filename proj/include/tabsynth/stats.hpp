#ifndef TABSYNTH_STATS_HPP
#define TABSYNTH_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// sample standard deviation, n-1 denominator (the library-wide convention)
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw ContractError("median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Interpolated empirical CDF over the fitted sample, using midpoint
// plotting positions (i - 0.5)/n. Evaluation clamps to
// [1/(2n), 1 - 1/(2n)] so downstream normal scores stay finite.
class EmpiricalCdf {
public:
    EmpiricalCdf() = default;

    explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
        if (sorted_.size() < 2) throw ContractError("EmpiricalCdf: need at least 2 values");
        std::sort(sorted_.begin(), sorted_.end());
    }

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted_values() const { return sorted_; }
    double min() const { return sorted_.front(); }
    double max() const { return sorted_.back(); }

    double eval(double x) const {
        const double n = static_cast<double>(sorted_.size());
        const double pmin = 0.5 / n;
        const double pmax = 1.0 - 0.5 / n;
        auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        if (it == sorted_.begin()) return pmin;
        if (it == sorted_.end()) return pmax;
        const std::size_t j = static_cast<std::size_t>(it - sorted_.begin());
        const double lo = sorted_[j - 1], hi = sorted_[j];
        const double plo = (static_cast<double>(j) - 0.5) / n;
        const double phi = (static_cast<double>(j) + 0.5) / n;
        return plo + (x - lo) / (hi - lo) * (phi - plo);
    }

    double inverse(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw ContractError("ecdf_inverse: u must lie in (0,1)");
        const double n = static_cast<double>(sorted_.size());
        const double pos = u * n - 0.5;  // fractional index into order statistics
        if (pos <= 0.0) return sorted_.front();
        if (pos >= n - 1.0) return sorted_.back();
        const std::size_t k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        return sorted_[k] + frac * (sorted_[k + 1] - sorted_[k]);
    }

private:
    std::vector<double> sorted_;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double normal_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

// Standard normal quantile: Acklam's rational approximation refined by one
// Newton step against erfc-based Phi. |Phi(inv(p)) - p| stays below 1e-9.
inline double normal_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ContractError("normal_inv_cdf: p must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = normal_cdf(x) - p;
    x -= e / normal_pdf(x);
    return x;
}

// Two-sample Kolmogorov-Smirnov statistic: sup-norm distance between the
// step ECDFs, computed by a merge over both sorted samples.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ContractError("ks_statistic: empty input");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

// 1-Wasserstein distance between empirical distributions. Equal sizes
// reduce to the mean absolute difference of paired order statistics;
// unequal sizes integrate |F_a - F_b| over the pooled support, which
// equals the quantile-function integral.
inline double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ContractError("wasserstein_1d: empty input");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa.size() == sb.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
        return s / static_cast<double>(sa.size());
    }
    std::vector<double> pooled;
    pooled.reserve(sa.size() + sb.size());
    std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(pooled));
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    double total = 0.0;
    std::size_t i = 0, j = 0;
    for (std::size_t k = 0; k + 1 < pooled.size(); ++k) {
        while (i < sa.size() && sa[i] <= pooled[k]) ++i;
        while (j < sb.size() && sb[j] <= pooled[k]) ++j;
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) *
                 (pooled[k + 1] - pooled[k]);
    }
    return total;
}

// d x d symmetric matrix with unit diagonal. Kept as a thin wrapper so the
// PSD-repair contract has a place to live.
struct CorrelationMatrix {
    Matrix values;

    std::size_t dim() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

inline double pearson_corr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("pearson_corr: length mismatch");
    const double n = static_cast<double>(x.size());
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (void)n;
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;  // zero-variance rule
    return sxy / std::sqrt(sxx * syy);
}

inline CorrelationMatrix pearson_corr_matrix(const std::vector<std::vector<double>>& columns) {
    const std::size_t d = columns.size();
    for (const auto& c : columns)
        if (c.size() != columns.front().size())
            throw ContractError("pearson_corr_matrix: length mismatch");
    if (!columns.empty() && columns.front().size() < 2)
        throw ContractError("pearson_corr_matrix: need at least 2 rows");
    Matrix m = Matrix::identity(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) m(i, j) = m(j, i) = pearson_corr(columns[i], columns[j]);
    return {std::move(m)};
}

// Eigen-clip repair: clip eigenvalues at a small floor, reconstruct, and
// rescale back to unit diagonal. Output always admits a Cholesky factor.
inline CorrelationMatrix nearest_psd_repair(const CorrelationMatrix& corr) {
    const std::size_t d = corr.dim();
    Matrix sym = corr.values;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (sym(i, j) + sym(j, i));
            sym(i, j) = sym(j, i) = v;
        }
    Matrix vecs;
    std::vector<double> eig = symmetric_eigen(sym, vecs);
    bool clipped = false;
    for (double& e : eig)
        if (e < 1e-10) {
            e = 1e-10;
            clipped = true;
        }
    if (!clipped) {
        Matrix out = sym;
        for (std::size_t i = 0; i < d; ++i) out(i, i) = 1.0;
        return {std::move(out)};
    }
    Matrix recon(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += vecs(i, k) * eig[k] * vecs(j, k);
            recon(i, j) = s;
        }
    Matrix out(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double denom = std::sqrt(recon(i, i) * recon(j, j));
            out(i, j) = i == j ? 1.0 : recon(i, j) / denom;
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = std::clamp(0.5 * (out(i, j) + out(j, i)), -1.0, 1.0);
            out(i, j) = out(j, i) = v;
        }
    return {std::move(out)};
}

// n x d matrix of correlated standard normals, rows L g with L the
// Cholesky factor. Throws if the matrix was not repaired to PSD first.
inline Matrix mvn_sample(const CorrelationMatrix& corr, std::size_t n, DeterministicRng& rng) {
    const std::size_t d = corr.dim();
    const Matrix l = cholesky(corr.values);
    Matrix out(n, d);
    std::vector<double> g(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < d; ++k) g[k] = rng.normal();
        double* row = out.row_ptr(r);
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += l(i, k) * g[k];
            row[i] = s;
        }
    }
    return out;
}

// Plug-in mutual information (nats) from the joint empirical distribution.
inline double mutual_information(std::span<const std::int32_t> x, std::span<const std::int32_t> y) {
    if (x.size() != y.size()) throw ContractError("mutual_information: length mismatch");
    if (x.empty()) throw ContractError("mutual_information: empty input");
    std::map<std::int32_t, double> px, py;
    std::map<std::pair<std::int32_t, std::int32_t>, double> pxy;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        px[x[i]] += 1.0;
        py[y[i]] += 1.0;
        pxy[{x[i], y[i]}] += 1.0;
    }
    double mi = 0.0;
    for (const auto& [key, c] : pxy) {
        const double pj = c / n;
        mi += pj * std::log(pj * n * n / (px[key.first] * py[key.second]));
    }
    return std::max(mi, 0.0);
}

}  // namespace tabsynth

#endif
