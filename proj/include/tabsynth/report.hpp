#ifndef TABSYNTH_REPORT_HPP
#define TABSYNTH_REPORT_HPP

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/evaluation.hpp"
#include "tabsynth/serialize.hpp"

namespace tabsynth {

inline Json similarity_to_json(const SimilarityReport& r) {
    Json j;
    j["dataset_score"] = r.dataset_score;
    Json cols = Json::array();
    for (const auto& c : r.columns) {
        Json cj;
        cj["name"] = c.name;
        cj["kind"] = c.kind == ColumnKind::Numeric ? "numeric" : "categorical";
        if (c.kind == ColumnKind::Numeric) {
            cj["d_mean"] = c.d_mean;
            cj["d_median"] = c.d_median;
            cj["d_std"] = c.d_std;
            cj["ks"] = c.ks;
            cj["w_norm"] = c.w_norm;
        } else {
            cj["mode_match"] = c.mode_match;
            cj["mode_freq_diff"] = c.mode_freq_diff;
        }
        cj["score"] = c.score;
        cols.push_back(std::move(cj));
    }
    j["columns"] = std::move(cols);
    return j;
}

inline Json metrics_to_json(const RegressionMetrics& m) {
    return Json{{"mae", m.mae}, {"mse", m.mse}, {"r2", m.r2}};
}

inline Json utility_to_json(const UtilityReport& r) {
    Json j;
    j["regressors"] = r.regressor_names;
    Json reps = Json::array();
    for (const auto& row : r.cells) {
        Json rep = Json::array();
        for (const auto& cell : row)
            rep.push_back(Json{{"real", metrics_to_json(cell.real)},
                               {"synthetic", metrics_to_json(cell.synth)}});
        reps.push_back(std::move(rep));
    }
    j["per_repetition"] = std::move(reps);
    j["avg_real"] = metrics_to_json(r.avg_real);
    j["avg_synthetic"] = metrics_to_json(r.avg_synth);
    j["diff"] = Json{{"mae", r.diff_mae}, {"mse", r.diff_mse}, {"r2", r.diff_r2}};
    j["metric_scores"] = Json{{"mae", r.score_mae}, {"mse", r.score_mse}, {"r2", r.score_r2}};
    j["overall_score"] = r.overall_score;
    return j;
}

// One generator x ratio cell of the benchmark.
struct BenchCellResult {
    std::string label;
    std::size_t ratio = 1;
    bool ok = false;
    std::string error;
    SimilarityReport similarity;
    UtilityReport utility;
    bool has_fixed_baseline = false;
    UtilityReport utility_fixed_baseline;
    std::string synthetic_csv;
    std::string model_json;
};

namespace detail {

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

// Markdown report: per ratio, the similarity table, the averaged ML
// performance table (real baseline row first), and the utility table.
inline std::string render_report_markdown(const std::vector<std::size_t>& ratios,
                                          const std::vector<BenchCellResult>& cells) {
    std::string md = "# Synthetic Data Benchmark Report\n";
    for (std::size_t ratio : ratios) {
        const std::string tag = "1:" + std::to_string(ratio);

        md += "\n## " + tag + " Statistical Similarity Scores\n\n";
        md += "| Generator | Similarity Score |\n|---|---|\n";
        for (const auto& c : cells) {
            if (c.ratio != ratio) continue;
            md += "| " + c.label + " | " +
                  (c.ok ? detail::fixed2(c.similarity.dataset_score) : "error: " + c.error) +
                  " |\n";
        }

        md += "\n## " + tag + " ML Models Average Performance\n\n";
        md += "| Dataset for Model Training | Avg. MAE | Avg. MSE | Avg. R2 |\n|---|---|---|---|\n";
        bool real_row_done = false;
        for (const auto& c : cells) {
            if (c.ratio != ratio) continue;
            if (c.ok && !real_row_done) {
                md += "| Real Data | " + detail::fixed2(c.utility.avg_real.mae) + " | " +
                      detail::fixed2(c.utility.avg_real.mse) + " | " +
                      detail::fixed2(c.utility.avg_real.r2) + " |\n";
                real_row_done = true;
            }
        }
        for (const auto& c : cells) {
            if (c.ratio != ratio) continue;
            if (c.ok) {
                md += "| " + c.label + " | " + detail::fixed2(c.utility.avg_synth.mae) + " | " +
                      detail::fixed2(c.utility.avg_synth.mse) + " | " +
                      detail::fixed2(c.utility.avg_synth.r2) + " |\n";
            } else {
                md += "| " + c.label + " | error: " + c.error + " | | |\n";
            }
        }

        md += "\n## " + tag + " Predictive Utility Scores\n\n";
        md += "| Generator | Utility Score |\n|---|---|\n";
        for (const auto& c : cells) {
            if (c.ratio != ratio) continue;
            md += "| " + c.label + " | " +
                  (c.ok ? detail::fixed2(c.utility.overall_score) : "error: " + c.error) + " |\n";
        }
    }
    md += "\nRegressors: linear_ridge, random_forest, gradient_boosted_trees (stand-in for "
          "XGBRegressor), knn (stand-in for SVR).\n";
    return md;
}

inline Json render_report_json(const Json& resolved_config,
                               const std::vector<std::size_t>& ratios,
                               const std::vector<BenchCellResult>& cells) {
    Json j;
    j["format"] = "tabsynth-report";
    j["version"] = 1;
    j["config"] = resolved_config;
    j["ratios"] = ratios;
    j["regressor_substitutions"] =
        Json{{"gradient_boosted_trees", "XGBRegressor"}, {"knn", "SVR"}};
    Json results = Json::array();
    for (const auto& c : cells) {
        Json cj;
        cj["generator"] = c.label;
        cj["ratio"] = c.ratio;
        cj["status"] = c.ok ? "ok" : "error";
        if (c.ok) {
            cj["similarity"] = similarity_to_json(c.similarity);
            cj["utility"] = utility_to_json(c.utility);
            if (c.has_fixed_baseline)
                cj["utility_fixed_baseline"] = utility_to_json(c.utility_fixed_baseline);
            cj["synthetic_csv"] = c.synthetic_csv;
            cj["model_json"] = c.model_json;
        } else {
            cj["error"] = c.error;
        }
        results.push_back(std::move(cj));
    }
    j["results"] = std::move(results);
    return j;
}

}  // namespace tabsynth

#endif
