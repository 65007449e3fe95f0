#ifndef TABSYNTH_BENCH_HPP
#define TABSYNTH_BENCH_HPP

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tabsynth/error.hpp"
#include "tabsynth/evaluation.hpp"
#include "tabsynth/generator.hpp"
#include "tabsynth/report.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/version.hpp"

namespace tabsynth {

struct GeneratorConfig {
    std::string name;
    std::string profile = "compact";
    std::string label;  // defaults to name, or name-profile for non-compact
    Json hyper = Json::object();
};

struct BenchConfig {
    std::filesystem::path input;
    SchemaHints schema_hints;
    std::string target;
    std::size_t row_budget = 1000;
    std::vector<std::size_t> ratios = {1, 10};
    std::string sample_mode = "block";  // "block" (contiguous) or "uniform"
    double train_fraction = 0.8;
    std::size_t repetitions = 5;
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0: hardware concurrency
    std::vector<GeneratorConfig> generators;

    void validate() const {
        if (generators.empty()) throw ContractError("bench config: generator list is empty");
        if (ratios.empty()) throw ContractError("bench config: ratio list is empty");
        for (std::size_t r : ratios)
            if (r < 1) throw ContractError("bench config: ratios must be >= 1");
        if (sample_mode != "block" && sample_mode != "uniform")
            throw ContractError("bench config: sample_mode must be 'block' or 'uniform'");
        if (target.empty()) throw ContractError("bench config: target column is required");
        std::vector<std::string> labels;
        for (const auto& g : generators) {
            const std::string l = g.label;
            if (std::find(labels.begin(), labels.end(), l) != labels.end())
                throw ContractError("bench config: duplicate generator label '" + l + "'");
            labels.push_back(l);
        }
    }
};

inline BenchConfig bench_config_from_json(const Json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw FormatError("bench config: missing or unsupported version (expected 1)");
    BenchConfig cfg;
    cfg.input = j.at("input").get<std::string>();
    cfg.target = j.at("target").get<std::string>();
    if (j.contains("schema_hints"))
        for (const auto& [k, v] : j.at("schema_hints").items())
            cfg.schema_hints[k] =
                v.get<std::string>() == "numeric" ? ColumnKind::Numeric : ColumnKind::Categorical;
    if (j.contains("row_budget")) cfg.row_budget = j.at("row_budget").get<std::size_t>();
    if (j.contains("ratios")) cfg.ratios = j.at("ratios").get<std::vector<std::size_t>>();
    if (j.contains("sample_mode")) cfg.sample_mode = j.at("sample_mode").get<std::string>();
    if (j.contains("split")) {
        const auto& s = j.at("split");
        if (s.contains("train_fraction")) cfg.train_fraction = s.at("train_fraction").get<double>();
        if (s.contains("repetitions")) cfg.repetitions = s.at("repetitions").get<std::size_t>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<std::size_t>();
    for (const auto& g : j.at("generators")) {
        GeneratorConfig gc;
        gc.name = g.at("name").get<std::string>();
        if (g.contains("profile")) gc.profile = g.at("profile").get<std::string>();
        if (g.contains("hyper")) gc.hyper = g.at("hyper");
        if (g.contains("label"))
            gc.label = g.at("label").get<std::string>();
        else
            gc.label = gc.profile == "compact" ? gc.name : gc.name + "-" + gc.profile;
        cfg.generators.push_back(std::move(gc));
    }
    cfg.validate();
    return cfg;
}

inline Json bench_config_to_json(const BenchConfig& cfg) {
    Json j;
    j["version"] = 1;
    j["input"] = cfg.input.string();
    if (!cfg.schema_hints.empty()) {
        Json hints;
        for (const auto& [k, v] : cfg.schema_hints)
            hints[k] = v == ColumnKind::Numeric ? "numeric" : "categorical";
        j["schema_hints"] = std::move(hints);
    }
    j["target"] = cfg.target;
    j["row_budget"] = cfg.row_budget;
    j["ratios"] = cfg.ratios;
    j["sample_mode"] = cfg.sample_mode;
    j["split"] = Json{{"train_fraction", cfg.train_fraction}, {"repetitions", cfg.repetitions}};
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    Json gens = Json::array();
    for (const auto& g : cfg.generators) {
        Json gj;
        gj["name"] = g.name;
        gj["profile"] = g.profile;
        gj["label"] = g.label;
        if (!g.hyper.empty()) gj["hyper"] = g.hyper;
        gens.push_back(std::move(gj));
    }
    j["generators"] = std::move(gens);
    return j;
}

struct RunManifest {
    Json resolved_config;
    std::string toolkit_version;
    std::vector<Json> stages;  // per task: label, ratio, seeds, timings, files
    std::vector<std::string> files;

    Json to_json() const {
        Json j;
        j["format"] = "tabsynth-manifest";
        j["version"] = 1;
        j["toolkit_version"] = toolkit_version;
        j["config"] = resolved_config;
        j["stages"] = stages;
        j["files"] = files;
        return j;
    }
};

namespace detail {

// The training sample and the per-ratio evaluation references come from
// one seeded draw: a contiguous block keeps the serial structure of
// sensor-style data, "uniform" draws a seeded permutation. The ratio-r
// reference extends the same draw to min(budget * r, n) rows, so the
// ratio-1 reference is exactly the training sample.
struct SampleFrame {
    std::vector<std::size_t> order;  // full-length row order; prefix = sample
    std::size_t budget = 0;

    std::vector<std::size_t> prefix(std::size_t k) const {
        return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(k, order.size()))};
    }
};

inline SampleFrame make_sample_frame(std::size_t n, std::size_t budget, const std::string& mode,
                                     std::uint64_t seed) {
    if (budget > n) throw ContractError("bench: row budget exceeds available rows");
    SampleFrame frame;
    frame.budget = budget;
    frame.order.resize(n);
    DeterministicRng rng(derive_seed(seed, "train-sample"));
    if (mode == "uniform") {
        std::iota(frame.order.begin(), frame.order.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(frame.order[i - 1], frame.order[rng.bounded(i)]);
    } else {
        // contiguous block at a seeded offset; the frame continues with the
        // rows that wrap around the block so prefixes stay contiguous-first
        const std::size_t offset = rng.bounded(n - budget + 1);
        std::size_t k = 0;
        for (std::size_t i = 0; i < budget; ++i) frame.order[k++] = offset + i;
        for (std::size_t i = offset + budget; i < n; ++i) frame.order[k++] = i;
        for (std::size_t i = 0; i < offset; ++i) frame.order[k++] = i;
    }
    return frame;
}

inline std::size_t resolve_workers(std::size_t configured) {
    if (const char* env = std::getenv("TABSYNTH_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace detail

// Runs the full benchmark: fit each configured generator on the seeded
// training sample, generate budget * ratio rows per ratio, score
// similarity and TSTR utility against the ratio-sized real reference, and
// write synthetic CSVs, model JSONs, report.json, report.md and
// manifest.json under out_dir. Generator failures are confined to their
// own report rows.
inline RunManifest run_benchmark(const BenchConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "synthetic");
    fs::create_directories(out_dir / "models");

    LoadStats load_stats;
    const Table full = load_csv(cfg.input, cfg.schema_hints, &load_stats);
    if (!full.column_index(cfg.target))
        throw SchemaError("bench: target column '" + cfg.target + "' not in input");

    const auto frame = detail::make_sample_frame(full.n_rows(), cfg.row_budget, cfg.sample_mode,
                                                 cfg.seed);
    const auto train_rows = frame.prefix(cfg.row_budget);
    Table train_sample = full.select_rows(train_rows);
    train_sample.refresh_numeric_bounds();

    // per-ratio real references (ratio 1 is the training sample itself)
    std::vector<Table> references;
    for (std::size_t ratio : cfg.ratios) {
        const auto rows = frame.prefix(cfg.row_budget * ratio);
        Table ref = full.select_rows(rows);
        ref.refresh_numeric_bounds();
        references.push_back(std::move(ref));
    }

    struct Task {
        std::size_t gen_index;
        std::size_t ratio_index;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < cfg.generators.size(); ++g)
        for (std::size_t r = 0; r < cfg.ratios.size(); ++r) tasks.push_back({g, r});

    std::vector<BenchCellResult> results(tasks.size());
    std::vector<Json> stage_notes(tasks.size());

    const auto run_task = [&](std::size_t ti) {
        const auto& task = tasks[ti];
        const GeneratorConfig& gc = cfg.generators[task.gen_index];
        const std::size_t ratio = cfg.ratios[task.ratio_index];
        const std::string ratio_str = std::to_string(ratio);
        BenchCellResult& cell = results[ti];
        cell.label = gc.label;
        cell.ratio = ratio;

        Json note;
        note["generator"] = gc.label;
        note["ratio"] = ratio;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const std::uint64_t fit_seed = derive_seed(cfg.seed, gc.label, ratio_str, "fit");
            const std::uint64_t sample_seed = derive_seed(cfg.seed, gc.label, ratio_str, "sample");
            const std::uint64_t tstr_seed = derive_seed(cfg.seed, "tstr", ratio_str);
            note["seeds"] = Json{{"fit", fit_seed}, {"sample", sample_seed}, {"tstr", tstr_seed}};

            auto gen = make_generator(gc.name, gc.profile, gc.hyper);
            DeterministicRng fit_rng(fit_seed);
            gen->fit(train_sample, fit_rng);

            const std::string model_rel = "models/" + gc.label + "_x" + ratio_str + ".json";
            {
                std::ofstream out(out_dir / model_rel, std::ios::binary);
                out << gen->save().dump(2) << '\n';
            }
            cell.model_json = model_rel;

            DeterministicRng sample_rng(sample_seed);
            const Table synthetic = gen->sample(cfg.row_budget * ratio, sample_rng);
            const std::string csv_rel = "synthetic/" + gc.label + "_x" + ratio_str + ".csv";
            write_csv(synthetic, out_dir / csv_rel);
            cell.synthetic_csv = csv_rel;

            const Table& reference = references[task.ratio_index];
            cell.similarity = similarity_score(reference, synthetic);

            SplitSpec split{cfg.train_fraction, tstr_seed, cfg.repetitions};
            TstrOptions opts;
            opts.synthetic_ratio = static_cast<double>(ratio);
            cell.utility = tstr_run(reference, synthetic, cfg.target, default_regressor_specs(),
                                    split, opts);

            // fixed-baseline variant: real side always the training sample
            if (ratio != 1) {
                SplitSpec fixed_split{cfg.train_fraction,
                                      derive_seed(cfg.seed, "tstr-fixed", ratio_str),
                                      cfg.repetitions};
                TstrOptions fixed_opts;
                fixed_opts.synthetic_ratio = static_cast<double>(ratio);
                cell.utility_fixed_baseline =
                    tstr_run(train_sample, synthetic, cfg.target, default_regressor_specs(),
                             fixed_split, fixed_opts);
                cell.has_fixed_baseline = true;
            }
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        const auto t1 = std::chrono::steady_clock::now();
        note["elapsed_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        note["status"] = cell.ok ? "ok" : "error";
        stage_notes[ti] = std::move(note);
    };

    const std::size_t workers = std::min(detail::resolve_workers(cfg.workers), tasks.size());
    if (workers <= 1) {
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t ti = next.fetch_add(1);
                    if (ti >= tasks.size()) return;
                    run_task(ti);
                }
            });
        for (auto& th : pool) th.join();
    }

    RunManifest manifest;
    manifest.toolkit_version = kVersion;
    manifest.resolved_config = bench_config_to_json(cfg);
    manifest.resolved_config["rows_loaded"] = load_stats.rows_read;
    manifest.resolved_config["rows_dropped_missing"] = load_stats.rows_dropped_missing;
    manifest.stages = stage_notes;

    // the report must not depend on execution details like worker count
    Json report_config = bench_config_to_json(cfg);
    report_config.erase("workers");
    const Json report = render_report_json(report_config, cfg.ratios, results);
    {
        std::ofstream out(out_dir / "report.json", std::ios::binary);
        out << report.dump(2) << '\n';
    }
    {
        std::ofstream out(out_dir / "report.md", std::ios::binary);
        out << render_report_markdown(cfg.ratios, results);
    }
    for (const auto& cell : results) {
        if (!cell.synthetic_csv.empty()) manifest.files.push_back(cell.synthetic_csv);
        if (!cell.model_json.empty()) manifest.files.push_back(cell.model_json);
    }
    manifest.files.push_back("report.json");
    manifest.files.push_back("report.md");
    manifest.files.push_back("manifest.json");
    {
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        out << manifest.to_json().dump(2) << '\n';
    }
    return manifest;
}

}  // namespace tabsynth

#endif
