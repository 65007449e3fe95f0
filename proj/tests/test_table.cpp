#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "tabsynth/table.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("load_csv infers numeric and categorical columns") {
    const auto p = write_temp("basic.csv", "a,b\n1,x\n2,y\n");
    const Table t = load_csv(p);
    REQUIRE(t.n_rows() == 2);
    REQUIRE(t.schema[0].kind == ColumnKind::Numeric);
    REQUIRE(t.schema[1].kind == ColumnKind::Categorical);
    CHECK(t.schema[1].categories == std::vector<std::string>{"x", "y"});
    CHECK(t.numeric(0) == NumericColumn{1.0, 2.0});
    CHECK(t.categorical(1) == CategoricalColumn{0, 1});
}

TEST_CASE("constant column records equal min and max") {
    const auto p = write_temp("constant.csv", "a\n1\n1\n");
    const Table t = load_csv(p);
    CHECK(t.schema[0].observed_min == 1.0);
    CHECK(t.schema[0].observed_max == 1.0);
}

TEST_CASE("distinct load errors") {
    const auto ragged = write_temp("ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(ragged), FormatError);
    const auto empty = write_temp("empty.csv", "");
    CHECK_THROWS_AS(load_csv(empty), EmptyInputError);
    CHECK_THROWS_AS(load_csv(fs::temp_directory_path() / "no_such_file_12345.csv"), IoError);
}

TEST_CASE("rows with missing cells are dropped and counted") {
    const auto p = write_temp("missing.csv", "a,b\n1,x\n,y\n3,z\n");
    LoadStats stats;
    const Table t = load_csv(p, {}, &stats);
    CHECK(t.n_rows() == 2);
    CHECK(stats.rows_read == 3);
    CHECK(stats.rows_dropped_missing == 1);
}

TEST_CASE("schema hints override inference") {
    const auto p = write_temp("hints.csv", "a,b\n1,2\n3,4\n");
    SchemaHints hints{{"b", ColumnKind::Categorical}};
    const Table t = load_csv(p, hints);
    CHECK(t.schema[0].kind == ColumnKind::Numeric);
    CHECK(t.schema[1].kind == ColumnKind::Categorical);
    CHECK(t.schema[1].categories == std::vector<std::string>{"2", "4"});
    SchemaHints bad{{"b", ColumnKind::Numeric}};
    const auto mixed = write_temp("hints2.csv", "a,b\n1,u\n3,v\n");
    CHECK_THROWS_AS(load_csv(mixed, bad), SchemaError);
}

TEST_CASE("quoted fields survive a round trip") {
    const auto p = write_temp("quoted.csv", "a,b\n1,\"x,\"\"y\"\"\"\n2,plain\n");
    const Table t = load_csv(p);
    REQUIRE(t.schema[1].categories[0] == "x,\"y\"");
    const auto out = fs::temp_directory_path() / "quoted_out.csv";
    write_csv(t, out);
    const Table back = load_csv(out, {}, nullptr, &t.schema);
    CHECK(back.categorical(1) == t.categorical(1));
}

TEST_CASE("csv round trip is cell-identical") {
    DeterministicRng rng(77);
    const Table t = oracles::random_table(rng, 50, 3, 2);
    const auto p = fs::temp_directory_path() / "roundtrip.csv";
    write_csv(t, p);
    const Table back = load_csv(p, {}, nullptr, &t.schema);
    REQUIRE(back.n_rows() == t.n_rows());
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.schema[c].kind == ColumnKind::Numeric) {
            REQUIRE(back.numeric(c) == t.numeric(c));
        } else {
            REQUIRE(back.categorical(c) == t.categorical(c));
        }
    }
}

TEST_CASE("train_test_split partitions with ceil sizes") {
    DeterministicRng rng(5);
    const Table t = oracles::random_table(rng, 10, 2, 0);
    SplitSpec spec{0.8, 42, 3};
    const auto [train, test] = train_test_split(t, spec, 0);
    CHECK(train.n_rows() == 8);
    CHECK(test.n_rows() == 2);

    // union of the two parts covers every row exactly once
    std::multiset<double> original(t.numeric(0).begin(), t.numeric(0).end());
    std::multiset<double> recovered(train.numeric(0).begin(), train.numeric(0).end());
    recovered.insert(test.numeric(0).begin(), test.numeric(0).end());
    CHECK(original == recovered);
}

TEST_CASE("splits replay identically and differ across repetitions") {
    DeterministicRng rng(6);
    const Table t = oracles::random_table(rng, 40, 1, 0);
    SplitSpec spec{0.8, 123, 5};
    const auto [a_train, a_test] = train_test_split(t, spec, 0);
    const auto [b_train, b_test] = train_test_split(t, spec, 0);
    CHECK(a_train.numeric(0) == b_train.numeric(0));
    CHECK(a_test.numeric(0) == b_test.numeric(0));
    const auto [c_train, c_test] = train_test_split(t, spec, 1);
    CHECK(a_train.numeric(0) != c_train.numeric(0));
}

TEST_CASE("split rejects tables that are too small") {
    DeterministicRng rng(7);
    const Table t = oracles::random_table(rng, 4, 1, 0);
    SplitSpec spec{0.9, 1, 1};
    CHECK_THROWS_AS(train_test_split(t, spec, 0), ContractError);
    CHECK_THROWS_AS(train_test_split(t, spec, 5), ContractError);
}

TEST_CASE("standardize produces zero mean unit std") {
    Table t;
    t.schema = {{"a", ColumnKind::Numeric, {}, 0, 0}};
    t.columns = {NumericColumn{1, 2, 3}};
    const auto params = standardize_fit(t);
    const Table z = standardize_apply(t, params);
    CHECK(mean_of(z.numeric(0)) == Catch::Approx(0.0).margin(1e-12));
    CHECK(sample_std(z.numeric(0)) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("constant columns map to zero") {
    Table t;
    t.schema = {{"a", ColumnKind::Numeric, {}, 0, 0}};
    t.columns = {NumericColumn{5, 5}};
    const Table z = standardize_apply(t, standardize_fit(t));
    CHECK(z.numeric(0) == NumericColumn{0, 0});
}

TEST_CASE("scaler transfers between tables with the fitted parameters") {
    Table a;
    a.schema = {{"a", ColumnKind::Numeric, {}, 0, 0}};
    a.columns = {NumericColumn{0, 2}};
    Table b = a;
    b.columns = {NumericColumn{4}};
    const Table z = standardize_apply(b, standardize_fit(a));
    // mu = 1, sigma = sqrt(2): (4 - 1)/sqrt(2)
    CHECK(z.numeric(0)[0] == Catch::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("scaler rejects mismatched schemas") {
    Table a;
    a.schema = {{"a", ColumnKind::Numeric, {}, 0, 0}};
    a.columns = {NumericColumn{0, 2}};
    Table b;
    b.schema = {{"other", ColumnKind::Numeric, {}, 0, 0}};
    b.columns = {NumericColumn{1, 2}};
    CHECK_THROWS_AS(standardize_apply(b, standardize_fit(a)), SchemaError);
}

TEST_CASE("standardize on mixed tables leaves categoricals alone") {
    DeterministicRng rng(9);
    const Table t = oracles::random_table(rng, 30, 2, 1);
    const Table z = standardize_apply(t, standardize_fit(t));
    CHECK(z.categorical(2) == t.categorical(2));
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(mean_of(z.numeric(c)) == Catch::Approx(0.0).margin(1e-12));
        CHECK(sample_std(z.numeric(c)) == Catch::Approx(1.0).margin(1e-12));
    }
}
