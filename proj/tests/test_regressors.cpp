#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "tabsynth/evaluation.hpp"
#include "tabsynth/regressors.hpp"

using namespace tabsynth;

namespace {

Matrix column_matrix(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

std::pair<Matrix, std::vector<double>> linear_dataset(std::size_t n, DeterministicRng& rng) {
    Matrix x(n, 3);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.uniform(-2.0, 2.0);
        y[r] = 3.0 * x(r, 0) - 1.5 * x(r, 1) + 0.5 * x(r, 2) + 1.0;
    }
    return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("ridge recovers an exact linear relation") {
    std::vector<double> xs{0, 1, 2, 3, 4, 5};
    std::vector<double> ys;
    for (double v : xs) ys.push_back(2.0 * v);
    LinearRidgePredictor model(column_matrix(xs), ys, 1e-6);
    CHECK(model.coefficients()[0] == Catch::Approx(2.0).margin(1e-6));
    const auto pred = model.predict(column_matrix(xs));
    const auto m = regression_metrics(ys, pred);
    CHECK(m.r2 == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("depth-zero tree predicts the target mean") {
    DeterministicRng rng(1);
    std::vector<double> y{1, 2, 3, 4};
    Matrix x(4, 1);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
    RegressionTree tree;
    std::vector<std::size_t> rows{0, 1, 2, 3};
    tree.fit(x, y, rows, 0, 1, 0, rng);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(tree.predict_row(x.row_ptr(i)) == Catch::Approx(2.5));
}

TEST_CASE("one boosting round moves predictions ten percent of the way") {
    // two groups, so the depth-1 tree captures the residuals exactly
    Matrix x(4, 1);
    x(0, 0) = x(1, 0) = 0.0;
    x(2, 0) = x(3, 0) = 1.0;
    std::vector<double> y{0, 0, 10, 10};
    RegressorSpec spec{.kind = RegressorKind::GradientBoostedTrees};
    spec.gbt_rounds = 1;
    spec.gbt_depth = 3;
    spec.gbt_shrinkage = 0.1;
    spec.gbt_min_leaf = 1;
    DeterministicRng rng(2);
    const auto model = fit_regressor(spec, x, y, rng);
    const auto pred = model->predict(x);
    // base prediction is mean 5; residuals are +-5, shrunk by 0.1
    CHECK(pred[0] == Catch::Approx(4.5));
    CHECK(pred[2] == Catch::Approx(5.5));
}

TEST_CASE("random forest prediction is the mean of its trees") {
    DeterministicRng data_rng(3);
    auto [x, y] = linear_dataset(200, data_rng);
    RegressorSpec spec{.kind = RegressorKind::RandomForest};
    spec.rf_trees = 25;
    DeterministicRng rng(4);
    RandomForestPredictor model(x, y, spec, rng);
    const auto pred = model.predict(x);
    for (std::size_t r = 0; r < 20; ++r) {
        const auto per_tree = model.tree_predictions(x.row_ptr(r));
        const double mean =
            std::accumulate(per_tree.begin(), per_tree.end(), 0.0) / static_cast<double>(per_tree.size());
        REQUIRE(std::abs(pred[r] - mean) <= 1e-12);
    }
}

TEST_CASE("every regressor beats the mean baseline on noiseless linear data") {
    DeterministicRng data_rng(5);
    auto [x, y] = linear_dataset(500, data_rng);
    for (const auto& spec : default_regressor_specs()) {
        DeterministicRng rng(6);
        const auto model = fit_regressor(spec, x, y, rng);
        const auto m = regression_metrics(y, model->predict(x));
        INFO(regressor_name(spec.kind));
        REQUIRE(m.r2 > 0.0);
    }
}

TEST_CASE("knn predicts the neighbourhood mean") {
    Matrix x(6, 1);
    std::vector<double> y{0, 1, 2, 10, 11, 12};
    for (std::size_t i = 0; i < 6; ++i) x(i, 0) = y[i];
    KnnPredictor model(x, y, 3);
    Matrix q(1, 1);
    q(0, 0) = 1.0;
    CHECK(model.predict(q)[0] == Catch::Approx(1.0));
    q(0, 0) = 11.0;
    CHECK(model.predict(q)[0] == Catch::Approx(11.0));
}

TEST_CASE("regression metrics fixed cases") {
    std::vector<double> y{1, 2, 3};
    const auto perfect = regression_metrics(y, y);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.r2 == 1.0);

    std::vector<double> mean_pred(3, 2.0);
    CHECK(regression_metrics(y, mean_pred).r2 == Catch::Approx(0.0).margin(1e-15));

    std::vector<double> y2{0, 2}, yhat2{1, 1};
    const auto m = regression_metrics(y2, yhat2);
    CHECK(m.mae == Catch::Approx(1.0));
    CHECK(m.mse == Catch::Approx(1.0));
    CHECK(m.r2 == Catch::Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(regression_metrics(y, y2), ContractError);
}

TEST_CASE("metrics match a brute-force reimplementation on random inputs") {
    DeterministicRng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.bounded(29);
        std::vector<double> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.normal() * 5.0;
            yhat[i] = y[i] + rng.normal();
        }
        const auto m = regression_metrics(y, yhat);
        double mae = 0.0, mse = 0.0, ss_res = 0.0, ss_tot = 0.0, mu = 0.0;
        for (double v : y) mu += v;
        mu /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            mae += std::abs(y[i] - yhat[i]) / static_cast<double>(n);
            mse += (y[i] - yhat[i]) * (y[i] - yhat[i]) / static_cast<double>(n);
            ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
            ss_tot += (y[i] - mu) * (y[i] - mu);
        }
        REQUIRE(std::abs(m.mae - mae) <= 1e-10);
        REQUIRE(std::abs(m.mse - mse) <= 1e-10);
        REQUIRE(std::abs(m.r2 - (1.0 - ss_res / ss_tot)) <= 1e-10);
    }
}

TEST_CASE("degenerate shapes are rejected") {
    RegressorSpec spec;
    DeterministicRng rng(8);
    Matrix x(1, 2);
    CHECK_THROWS_AS(fit_regressor(spec, x, {1.0}, rng), ContractError);
    RegressorSpec bad;
    bad.knn_k = 0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("feature builder one-hot encodes against the reference schema") {
    Table ref;
    ref.schema = {{"x", ColumnKind::Numeric, {}, 0, 0},
                  {"c", ColumnKind::Categorical, {"a", "b"}, 0, 0}};
    ref.columns = {NumericColumn{1.0, 2.0}, CategoricalColumn{0, 1}};
    const FeatureBuilder builder(ref.schema);
    REQUIRE(builder.width == 3);

    Table other;  // same column names, categories in a different order plus a new one
    other.schema = {{"x", ColumnKind::Numeric, {}, 0, 0},
                    {"c", ColumnKind::Categorical, {"b", "zzz", "a"}, 0, 0}};
    other.columns = {NumericColumn{5.0, 6.0, 7.0}, CategoricalColumn{0, 1, 2}};
    const Matrix x = builder.build(other);
    // row 0: label "b" -> ref slot 1
    CHECK(x(0, 2) == 1.0);
    CHECK(x(0, 1) == 0.0);
    // row 1: unseen label -> all-zero block
    CHECK(x(1, 1) == 0.0);
    CHECK(x(1, 2) == 0.0);
    // row 2: label "a" -> ref slot 0
    CHECK(x(2, 1) == 1.0);
}
