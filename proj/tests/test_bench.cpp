#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "tabsynth/bench.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

fs::path make_toy_csv(const std::string& name) {
    DeterministicRng rng(4242);
    Table t;
    t.schema = {{"a", ColumnKind::Numeric, {}, 0, 0},
                {"b", ColumnKind::Numeric, {}, 0, 0},
                {"y", ColumnKind::Numeric, {}, 0, 0}};
    const std::size_t n = 260;
    NumericColumn a(n), b(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal() * 2.0;
        b[i] = rng.uniform(0.0, 5.0);
        y[i] = 20.0 + 3.0 * a[i] + 2.0 * b[i] + 6.0 * rng.normal();
    }
    t.columns = {a, b, y};
    t.refresh_numeric_bounds();
    const fs::path p = fs::temp_directory_path() / name;
    write_csv(t, p);
    return p;
}

BenchConfig toy_config(const fs::path& input) {
    Json j = {
        {"version", 1},
        {"input", input.string()},
        {"target", "y"},
        {"row_budget", 200},
        {"ratios", {1, 2}},
        {"sample_mode", "block"},
        {"split", {{"train_fraction", 0.8}, {"repetitions", 2}}},
        {"seed", 777},
        {"workers", 1},
        {"generators",
         {{{"name", "copula"}},
          {{"name", "bayes-net"}, {"hyper", {{"bins", 6}}}},
          {{"name", "tvae"},
           {"hyper", {{"epochs", 2}, {"batch", 50}, {"hidden", {8}}, {"latent", 2}, {"max_k", 2}}}}}},
    };
    return bench_config_from_json(j);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("benchmark produces one synthetic csv, model and scores per cell") {
    const auto input = make_toy_csv("bench_toy.csv");
    const auto cfg = toy_config(input);
    const fs::path out = fs::temp_directory_path() / "bench_out_basic";
    fs::remove_all(out);
    const auto manifest = run_benchmark(cfg, out);

    REQUIRE(manifest.stages.size() == 6);  // 3 generators x 2 ratios
    const Json report = Json::parse(slurp(out / "report.json"));
    REQUIRE(report.at("results").size() == 6);
    for (const auto& cell : report.at("results")) {
        REQUIRE(cell.at("status") == "ok");
        REQUIRE(fs::exists(out / cell.at("synthetic_csv").get<std::string>()));
        REQUIRE(fs::exists(out / cell.at("model_json").get<std::string>()));
        REQUIRE(cell.at("similarity").at("dataset_score").get<double>() > 0.0);
        REQUIRE(cell.at("similarity").at("dataset_score").get<double>() <= 100.0);
        REQUIRE(cell.at("utility").at("overall_score").get<double>() <= 1.0);
    }
    // synthetic row counts honour budget * ratio
    const Table synth1 = load_csv(out / "synthetic" / "copula_x1.csv");
    const Table synth2 = load_csv(out / "synthetic" / "copula_x2.csv");
    REQUIRE(synth1.n_rows() == 200);
    REQUIRE(synth2.n_rows() == 400);
    REQUIRE(fs::exists(out / "report.md"));
    REQUIRE(fs::exists(out / "manifest.json"));
}

TEST_CASE("same seed gives byte-identical reports across worker counts") {
    const auto input = make_toy_csv("bench_toy2.csv");
    BenchConfig cfg = toy_config(input);

    const fs::path out1 = fs::temp_directory_path() / "bench_det_w1";
    const fs::path out1b = fs::temp_directory_path() / "bench_det_w1b";
    const fs::path out4 = fs::temp_directory_path() / "bench_det_w4";
    fs::remove_all(out1);
    fs::remove_all(out1b);
    fs::remove_all(out4);

    cfg.workers = 1;
    run_benchmark(cfg, out1);
    run_benchmark(cfg, out1b);
    cfg.workers = 4;
    run_benchmark(cfg, out4);

    const std::string r1 = slurp(out1 / "report.json");
    REQUIRE(r1 == slurp(out1b / "report.json"));
    REQUIRE(r1 == slurp(out4 / "report.json"));
    REQUIRE(slurp(out1 / "synthetic" / "tvae_x2.csv") == slurp(out4 / "synthetic" / "tvae_x2.csv"));
}

TEST_CASE("a failing generator is isolated to its own row") {
    const auto input = make_toy_csv("bench_toy3.csv");
    Json j = {
        {"version", 1},
        {"input", input.string()},
        {"target", "y"},
        {"row_budget", 200},
        {"ratios", {1}},
        {"split", {{"train_fraction", 0.8}, {"repetitions", 2}}},
        {"seed", 5},
        {"workers", 1},
        {"generators",
         {{{"name", "copula"}},
          // batch larger than the table: training must fail for this one
          {{"name", "tvae"}, {"hyper", {{"epochs", 1}, {"batch", 5000}}}}}},
    };
    const auto cfg = bench_config_from_json(j);
    const fs::path out = fs::temp_directory_path() / "bench_out_fail";
    fs::remove_all(out);
    run_benchmark(cfg, out);
    const Json report = Json::parse(slurp(out / "report.json"));
    REQUIRE(report.at("results")[0].at("status") == "ok");
    REQUIRE(report.at("results")[1].at("status") == "error");
    REQUIRE(!report.at("results")[1].at("error").get<std::string>().empty());
    const std::string md = slurp(out / "report.md");
    REQUIRE(md.find("error:") != std::string::npos);
}

TEST_CASE("markdown report carries three table sections per ratio") {
    const auto input = make_toy_csv("bench_toy_md.csv");
    const auto cfg = toy_config(input);
    const fs::path out = fs::temp_directory_path() / "bench_out_md";
    fs::remove_all(out);
    run_benchmark(cfg, out);
    const std::string md = slurp(out / "report.md");
    std::size_t sections = 0;
    for (std::size_t pos = md.find("\n## "); pos != std::string::npos;
         pos = md.find("\n## ", pos + 1))
        ++sections;
    REQUIRE(sections == 3 * cfg.ratios.size());
    REQUIRE(md.find("Statistical Similarity Scores") != std::string::npos);
    REQUIRE(md.find("ML Models Average Performance") != std::string::npos);
    REQUIRE(md.find("Predictive Utility Scores") != std::string::npos);
    REQUIRE(md.find("Real Data") != std::string::npos);
}

TEST_CASE("TABSYNTH_WORKERS env var overrides the configured worker count") {
    setenv("TABSYNTH_WORKERS", "3", 1);
    REQUIRE(detail::resolve_workers(8) == 3);
    unsetenv("TABSYNTH_WORKERS");
    REQUIRE(detail::resolve_workers(8) == 8);
}

#ifdef TABSYNTH_CLI_PATH
TEST_CASE("cli fit / generate / evaluate round trip") {
    const auto input = make_toy_csv("bench_cli.csv");
    const fs::path model = fs::temp_directory_path() / "cli_model.json";
    const fs::path synth = fs::temp_directory_path() / "cli_synth.csv";
    const std::string cli = TABSYNTH_CLI_PATH;

    REQUIRE(std::system((cli + " fit " + input.string() + " --generator copula --out " +
                         model.string() + " --seed 5 > /dev/null")
                            .c_str()) == 0);
    REQUIRE(std::system((cli + " generate " + model.string() + " --n 100 --out " + synth.string() +
                         " --seed 6 2> /dev/null")
                            .c_str()) == 0);
    const Table generated = load_csv(synth);
    REQUIRE(generated.n_rows() == 100);
    REQUIRE(std::system((cli + " evaluate " + input.string() + " " + synth.string() +
                         " --target y --reps 2 > /dev/null")
                            .c_str()) == 0);
    // corrupt model version -> load must fail with a diagnostic
    Json doc = Json::parse(slurp(model));
    doc["version"] = 42;
    {
        std::ofstream out(model, std::ios::binary);
        out << doc.dump();
    }
    REQUIRE(std::system((cli + " generate " + model.string() + " --n 5 2> /dev/null").c_str()) !=
            0);
}
#endif

TEST_CASE("config validation rejects bad inputs") {
    CHECK_THROWS_AS(bench_config_from_json(Json{{"input", "x.csv"}}), FormatError);  // no version
    Json j = {{"version", 1}, {"input", "x.csv"}, {"target", "y"},
              {"generators", Json::array()}};
    CHECK_THROWS_AS(bench_config_from_json(j), ContractError);  // empty generators
    Json dup = {{"version", 1},  {"input", "x.csv"},
                {"target", "y"}, {"ratios", {1}},
                {"seed", 1},     {"generators", {{{"name", "copula"}}, {{"name", "copula"}}}}};
    CHECK_THROWS_AS(bench_config_from_json(dup), ContractError);  // duplicate labels
}

TEST_CASE("row budget larger than the table is rejected") {
    const auto input = make_toy_csv("bench_toy4.csv");
    BenchConfig cfg = toy_config(input);
    cfg.row_budget = 100000;
    const fs::path out = fs::temp_directory_path() / "bench_out_too_big";
    CHECK_THROWS_AS(run_benchmark(cfg, out), ContractError);
}

TEST_CASE("the shipped default config mirrors the six-by-two design") {
    // located relative to this source file: ../configs/bench_default.json
    const fs::path cfg_path = fs::path(__FILE__).parent_path().parent_path() / "configs" /
                              "bench_default.json";
    REQUIRE(fs::exists(cfg_path));
    std::ifstream in(cfg_path);
    const auto cfg = bench_config_from_json(Json::parse(in));
    REQUIRE(cfg.generators.size() == 6);
    REQUIRE(cfg.ratios == std::vector<std::size_t>{1, 10});
    // 6 generator configs x 2 ratios -> 12 synthetic datasets
    REQUIRE(cfg.generators.size() * cfg.ratios.size() == 12);
}
