// tabsynth command line: fit generators, sample synthetic tables, score
// similarity/utility between CSVs, and run the full benchmark.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabsynth/bench.hpp"
#include "tabsynth/evaluation.hpp"
#include "tabsynth/generator.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/version.hpp"

namespace fs = std::filesystem;
using tabsynth::Json;

namespace {

tabsynth::SchemaHints load_hints(const std::string& path) {
    tabsynth::SchemaHints hints;
    if (path.empty()) return hints;
    std::ifstream in(path);
    if (!in) throw tabsynth::IoError("cannot open schema hints '" + path + "'");
    const Json j = Json::parse(in);
    for (const auto& [name, kind] : j.items())
        hints[name] = kind.get<std::string>() == "numeric" ? tabsynth::ColumnKind::Numeric
                                                           : tabsynth::ColumnKind::Categorical;
    return hints;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tabsynth::IoError("cannot open '" + path + "'");
    return Json::parse(in);
}

int run_fit(const std::string& input, const std::string& generator, const std::string& profile,
            const std::string& out, const std::string& hints_path, const std::string& hyper_path,
            std::uint64_t seed) {
    tabsynth::LoadStats stats;
    const auto table = tabsynth::load_csv(input, load_hints(hints_path), &stats);
    if (stats.rows_dropped_missing > 0)
        std::cerr << "note: dropped " << stats.rows_dropped_missing
                  << " rows with missing cells\n";
    Json hyper = Json::object();
    if (!hyper_path.empty()) hyper = load_json_file(hyper_path);
    auto gen = tabsynth::make_generator(generator, profile, hyper);
    tabsynth::DeterministicRng rng(tabsynth::derive_seed(seed, generator, "fit"));
    gen->fit(table, rng);
    std::ofstream of(out, std::ios::binary);
    if (!of) throw tabsynth::IoError("cannot open '" + out + "' for writing");
    of << gen->save().dump(2) << '\n';
    std::cout << "fitted " << generator << " on " << table.n_rows() << " rows -> " << out << "\n";
    return 0;
}

int run_generate(const std::string& model_path, std::size_t n, const std::string& out,
                 std::uint64_t seed) {
    auto gen = tabsynth::load_model(load_json_file(model_path));
    tabsynth::DeterministicRng rng(tabsynth::derive_seed(seed, gen->name(), "sample"));
    const auto synthetic = gen->sample(n, rng);
    if (out.empty() || out == "-") {
        const fs::path tmp = fs::temp_directory_path() / "tabsynth_generate_stdout.csv";
        tabsynth::write_csv(synthetic, tmp);
        std::ifstream in(tmp, std::ios::binary);
        std::cout << in.rdbuf();
    } else {
        tabsynth::write_csv(synthetic, out);
        std::cerr << "wrote " << synthetic.n_rows() << " rows -> " << out << "\n";
    }
    return 0;
}

int run_evaluate(const std::string& real_path, const std::string& synth_path,
                 const std::string& target, std::size_t reps, double train_fraction,
                 std::uint64_t seed, double ratio, const std::string& json_out) {
    const auto real = tabsynth::load_csv(real_path);
    // load the synthetic table with the real table's kinds so inference
    // differences cannot skew the comparison
    tabsynth::SchemaHints hints;
    for (const auto& cs : real.schema) hints[cs.name] = cs.kind;
    const auto synth = tabsynth::load_csv(synth_path, hints);

    const auto sim = tabsynth::similarity_score(real, synth);
    tabsynth::SplitSpec split{train_fraction, tabsynth::derive_seed(seed, "evaluate"), reps};
    tabsynth::TstrOptions opts;
    opts.synthetic_ratio = ratio;
    const auto utility = tabsynth::tstr_run(real, synth, target,
                                            tabsynth::default_regressor_specs(), split, opts);

    std::printf("statistical similarity: %.2f / 100\n", sim.dataset_score);
    std::printf("predictive utility:     %.4f (max 1)\n", utility.overall_score);
    std::printf("  avg real  MAE %.4f  MSE %.4f  R2 %.4f\n", utility.avg_real.mae,
                utility.avg_real.mse, utility.avg_real.r2);
    std::printf("  avg synth MAE %.4f  MSE %.4f  R2 %.4f\n", utility.avg_synth.mae,
                utility.avg_synth.mse, utility.avg_synth.r2);
    if (!json_out.empty()) {
        Json j;
        j["similarity"] = tabsynth::similarity_to_json(sim);
        j["utility"] = tabsynth::utility_to_json(utility);
        std::ofstream of(json_out, std::ios::binary);
        of << j.dump(2) << '\n';
    }
    return 0;
}

int run_bench(const std::string& config_path, const std::string& out_dir, std::int64_t seed) {
    Json cj = load_json_file(config_path);
    if (seed >= 0) cj["seed"] = static_cast<std::uint64_t>(seed);
    tabsynth::BenchConfig cfg = tabsynth::bench_config_from_json(cj);
    // input paths are resolved relative to the config file
    if (cfg.input.is_relative()) cfg.input = fs::path(config_path).parent_path() / cfg.input;
    const auto manifest = tabsynth::run_benchmark(cfg, out_dir);
    std::size_t ok = 0;
    for (const auto& stage : manifest.stages)
        if (stage.at("status") == "ok") ++ok;
    std::cout << "benchmark complete: " << ok << "/" << manifest.stages.size()
              << " generator runs ok, outputs in " << out_dir << "\n";
    return ok == manifest.stages.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular synthetic data toolkit"};
    app.set_version_flag("--version", tabsynth::kVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 0;

    auto* fit = app.add_subcommand("fit", "fit a generator on a CSV and save the model");
    std::string fit_input, fit_gen = "copula", fit_profile = "compact", fit_out = "model.json";
    std::string fit_hints, fit_hyper;
    fit->add_option("input", fit_input, "training CSV")->required();
    fit->add_option("--generator", fit_gen, "copula | bayes-net | tvae | ctgan");
    fit->add_option("--profile", fit_profile, "compact | deep");
    fit->add_option("--out", fit_out, "output model path");
    fit->add_option("--schema", fit_hints, "JSON schema hints {column: numeric|categorical}");
    fit->add_option("--hyper", fit_hyper, "JSON hyperparameter overrides");
    fit->add_option("--seed", seed, "master seed");

    auto* gen = app.add_subcommand("generate", "sample rows from a saved model");
    std::string gen_model, gen_out;
    std::size_t gen_n = 100;
    gen->add_option("model", gen_model, "model JSON")->required();
    gen->add_option("--n", gen_n, "rows to generate");
    gen->add_option("--out", gen_out, "output CSV (stdout when omitted)");
    gen->add_option("--seed", seed, "master seed");

    auto* eval = app.add_subcommand("evaluate", "similarity + TSTR between two CSVs");
    std::string eval_real, eval_synth, eval_target, eval_json;
    std::size_t eval_reps = 5;
    double eval_fraction = 0.8, eval_ratio = 1.0;
    eval->add_option("real", eval_real, "real CSV")->required();
    eval->add_option("synthetic", eval_synth, "synthetic CSV")->required();
    eval->add_option("--target", eval_target, "numeric target column")->required();
    eval->add_option("--reps", eval_reps, "holdout repetitions");
    eval->add_option("--train-fraction", eval_fraction, "train fraction per split");
    eval->add_option("--ratio", eval_ratio, "synthetic subset cap multiplier");
    eval->add_option("--json", eval_json, "also write a JSON report here");
    eval->add_option("--seed", seed, "master seed");

    auto* bench = app.add_subcommand("benchmark", "full generator x ratio benchmark");
    std::string bench_config, bench_out = "bench_out";
    std::int64_t bench_seed = -1;
    bench->add_option("--config", bench_config, "benchmark config JSON")->required();
    bench->add_option("--out", bench_out, "output directory");
    bench->add_option("--seed", bench_seed, "override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (*fit) return run_fit(fit_input, fit_gen, fit_profile, fit_out, fit_hints, fit_hyper, seed);
        if (*gen) return run_generate(gen_model, gen_n, gen_out, seed);
        if (*eval)
            return run_evaluate(eval_real, eval_synth, eval_target, eval_reps, eval_fraction, seed,
                                eval_ratio, eval_json);
        if (*bench) return run_bench(bench_config, bench_out, bench_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
