#include "mm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mm/dataset.hpp"

namespace mm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp_compact() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

std::string timestamp_iso() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void write_json_atomic(const fs::path& path, const json& j) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

json config_json(const ExperimentConfig& c) {
    return json{
        {"mode", c.mode == EvolutionMode::Assisted ? "assisted" : "normal"},
        {"epochs", c.epochs},
        {"runs", c.runs},
        {"inference_levels", c.inference_levels},
        {"evolution",
         {{"mu", c.evolution.mu},
          {"lambda", c.evolution.lambda},
          {"generations", c.evolution.generations},
          {"top_x", c.evolution.top_x},
          {"train_interval", c.evolution.train_interval},
          {"random_action_chance", c.evolution.random_action_chance},
          {"seed", c.evolution.seed}}},
        {"training",
         {{"learning_rate", c.training.learning_rate},
          {"batch_size", c.training.batch_size},
          {"seed", c.training.seed}}},
        {"domain",
         {{"width", c.evolution.width},
          {"height", c.evolution.height},
          {"solid_probability", c.evolution.solid_probability},
          {"crop_size", c.evolution.crop_size},
          {"max_passes", c.max_passes}}},
    };
}

json metrics_json(const BatchMetrics& m) {
    json j{{"total", m.total},
           {"successes", m.successes},
           {"success_rate", m.success_rate},
           {"diversity", m.diversity}};
    j["mean_iterations"] = m.mean_iterations ? json(*m.mean_iterations) : json(nullptr);
    j["iteration_std"] = m.iteration_std ? json(*m.iteration_std) : json(nullptr);
    return j;
}

void write_outcomes_csv(const std::vector<GenerationOutcome>& outcomes, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "index,success,iterations,path_length,empty_tiles,wall_time_ms\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const GenerationOutcome& o = outcomes[i];
        out << i << ',' << (o.success ? 1 : 0) << ',' << o.iterations << ',';
        if (o.success) out << o.path_length;
        out << ',';
        if (o.success) out << o.empty_tiles;
        out << ',' << fmt(o.wall_time_ms, 3) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

double ci95(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    const double std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    return 1.96 * std / std::sqrt(static_cast<double>(values.size()));
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

fs::path resolve_output_root(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (!config_value.empty()) return config_value;
    if (const char* env = std::getenv(kOutputRootEnvVar); env != nullptr && *env != '\0') {
        return env;
    }
    return "runs";
}

fs::path create_run_dir(const fs::path& root, const std::string& run_id) {
    fs::create_directories(root);
    for (int suffix = 1;; ++suffix) {
        fs::path dir = root / (suffix == 1 ? run_id : run_id + "-" + std::to_string(suffix));
        std::error_code ec;
        if (fs::create_directory(dir, ec) && !ec) return dir;
        if (ec && ec != std::errc::file_exists) {
            throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
        }
    }
}

EvolveArtifacts cmd_evolve(const ExperimentConfig& config, const std::string& out_override,
                           ExecMode exec, bool quiet) {
    config.validate();
    const fs::path root = resolve_output_root(out_override, config.output_dir);
    const std::string mode_name = config.mode == EvolutionMode::Assisted ? "assisted" : "normal";
    const std::string base_id = mode_name + std::to_string(config.epochs) + "-s" +
                                std::to_string(config.evolution.seed) + "-" + timestamp_compact();
    EvolveArtifacts art;
    art.run_dir = create_run_dir(root, base_id);
    const std::string run_id = art.run_dir.filename().string();
    fs::create_directories(art.run_dir / "datasets");
    fs::create_directories(art.run_dir / "weights");
    fs::create_directories(art.run_dir / "levels");

    json manifest{{"run_id", run_id},
                  {"tool_version", kToolVersion},
                  {"status", "running"},
                  {"created_at", timestamp_iso()},
                  {"config", config_json(config)},
                  {"seeds",
                   {{"evolution", config.evolution.seed}, {"training", config.training.seed}}}};
    write_json_atomic(art.run_dir / "manifest.json", manifest);

    art.stats_csv = art.run_dir / "stats.csv";
    std::ofstream stats(art.stats_csv, std::ios::binary);
    if (!stats) throw std::runtime_error("cannot open " + art.stats_csv.string());
    stats << "generation,best_fitness,mean_top10_fitness,dataset_size,history_similarity\n";

    json events = json::array();
    EvolutionHooks hooks;
    hooks.on_generation = [&](const GenerationStats& s, const Population&) {
        char row[160];
        std::snprintf(row, sizeof row, "%d,%.10g,%.10g,%zu,%.10g\n", s.generation,
                      s.best_fitness, s.mean_top_fitness, s.dataset_size, s.history_similarity);
        stats << row;
        if (!quiet &&
            (s.generation % 100 == 0 || s.generation == config.evolution.generations)) {
            std::cout << "[" << run_id << "] gen " << s.generation << "/"
                      << config.evolution.generations << " best=" << fmt(s.best_fitness, 4)
                      << " top" << config.evolution.top_x << "=" << fmt(s.mean_top_fitness, 4)
                      << " dataset=" << s.dataset_size
                      << " similarity=" << fmt(s.history_similarity, 3) << '\n';
        }
    };
    hooks.on_training_event = [&](int event, int generation, const PolicyWeights& weights,
                                  const TrainingDataset& dataset,
                                  const std::vector<double>& epoch_loss) {
        TrainingDataset tagged = dataset;
        tagged.run_id = run_id;
        const fs::path ds_path =
            art.run_dir / "datasets" / ("gen" + std::to_string(generation) + ".ds");
        save_dataset(tagged, ds_path.string());
        const fs::path w_path = art.run_dir / "weights" /
                                (config.mode == EvolutionMode::Assisted
                                     ? "gen" + std::to_string(generation) + ".w"
                                     : std::string("final.w"));
        save_weights(weights, w_path.string());
        art.weights_files.push_back(w_path);
        events.push_back(json{{"event", event},
                              {"generation", generation},
                              {"dataset_size", dataset.size()},
                              {"epoch_loss", epoch_loss},
                              {"weights", w_path.filename().string()},
                              {"dataset", ds_path.filename().string()}});
        if (!quiet) {
            std::cout << "[" << run_id << "] training event " << event << " at gen "
                      << generation << ": " << dataset.size() << " examples, final loss "
                      << (epoch_loss.empty() ? std::string("-") : fmt(epoch_loss.back(), 4))
                      << '\n';
        }
    };

    art.result = run_evolution(config.evolution, config.mode, config.training, hooks, exec);
    stats.close();

    const auto top = select_parents(art.result.population, config.evolution.top_x);
    json level_files = json::array();
    for (std::size_t i = 0; i < top.size(); ++i) {
        const fs::path path = art.run_dir / "levels" / (std::to_string(i) + ".txt");
        save_level(top[i].current_level, path.string());
        level_files.push_back(path.filename().string());
    }

    art.final_dataset = art.run_dir / "datasets" /
                        ("gen" + std::to_string(config.evolution.generations) + ".ds");
    if (!fs::exists(art.final_dataset)) {
        TrainingDataset ds = extract_dataset(top, run_id, config.evolution.generations,
                                             config.evolution.crop_size);
        save_dataset(ds, art.final_dataset.string());
    }
    if (!art.weights_files.empty()) art.final_weights = art.weights_files.back();

    manifest["status"] = "completed";
    manifest["completed_at"] = timestamp_iso();
    manifest["training_events"] = events;
    json weight_files = json::array();
    for (const auto& p : art.weights_files) weight_files.push_back(p.filename().string());
    manifest["artifacts"] = json{
        {"stats_csv", "stats.csv"},
        {"levels", level_files},
        {"weights", weight_files},
        {"final_weights",
         art.final_weights.empty() ? json(nullptr) : json(art.final_weights.filename().string())},
        {"final_dataset", art.final_dataset.filename().string()}};
    write_json_atomic(art.run_dir / "manifest.json", manifest);
    return art;
}

GenerateArtifacts cmd_generate(const std::string& weights_path, int n, std::uint64_t seed,
                               const fs::path& out_dir, const InferenceConfig& inference,
                               ExecMode exec, bool quiet) {
    const PolicyWeights weights = load_weights(weights_path);

    GenerateArtifacts art;
    const fs::path parent = out_dir.has_parent_path() ? out_dir.parent_path() : fs::path(".");
    art.out_dir = create_run_dir(parent, out_dir.filename().string());
    fs::create_directories(art.out_dir / "levels");

    art.outcomes = batch_generate(weights, n, seed, inference, exec);
    for (std::size_t i = 0; i < art.outcomes.size(); ++i) {
        save_level(art.outcomes[i].final_level,
                   (art.out_dir / "levels" / (std::to_string(i) + ".txt")).string());
    }
    write_outcomes_csv(art.outcomes, art.out_dir / "outcomes.csv");

    art.metrics = compute_batch_metrics(art.outcomes);
    const ExpressiveRange era =
        expressive_range(art.outcomes, inference.width, inference.height);
    emit_era_csv(era, (art.out_dir / "era.csv").string());
    emit_era_svg(era, (art.out_dir / "era.svg").string());

    json report{{"tool", {{"name", "mutation-models"}, {"version", kToolVersion}}},
                {"created_at", timestamp_iso()},
                {"provenance",
                 {{"weights", weights_path}, {"seed", seed}, {"episodes", n}}},
                {"diversity_denominator", "successful levels"},
                {"metrics", metrics_json(art.metrics)},
                {"config",
                 {{"width", inference.width},
                  {"height", inference.height},
                  {"solid_probability", inference.solid_probability},
                  {"max_passes", inference.max_passes},
                  {"crop_size", inference.crop_size}}}};
    write_json_atomic(art.out_dir / "report.json", report);

    if (!quiet) {
        std::cout << "generated " << n << " levels -> " << art.out_dir.string()
                  << "\n  success " << fmt(art.metrics.success_rate, 2) << "%  diversity "
                  << fmt(art.metrics.diversity, 2) << "%";
        if (art.metrics.mean_iterations) {
            std::cout << "  iterations " << fmt(*art.metrics.mean_iterations, 2) << " +- "
                      << fmt(art.metrics.iteration_std.value_or(0.0), 2);
        }
        std::cout << '\n';
    }
    return art;
}

std::vector<GenerationOutcome> load_outcomes_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<GenerationOutcome> outcomes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;  // header
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        while (fields.size() < 6) fields.emplace_back();
        GenerationOutcome o;
        try {
            o.success = std::stoi(fields[1]) != 0;
            o.iterations = std::stoi(fields[2]);
            o.path_length = fields[3].empty() ? 0 : std::stoi(fields[3]);
            o.empty_tiles = fields[4].empty() ? 0 : std::stoi(fields[4]);
            o.wall_time_ms = fields[5].empty() ? 0.0 : std::stod(fields[5]);
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed outcome row");
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

BatchMetrics cmd_analyze(const fs::path& outcomes_dir, bool quiet) {
    const auto outcomes = load_outcomes_csv(outcomes_dir / "outcomes.csv");
    if (outcomes.empty()) throw std::runtime_error("no outcomes found in " + outcomes_dir.string());

    int width = kLevelSize, height = kLevelSize;
    const fs::path sample_level = outcomes_dir / "levels" / "0.txt";
    if (fs::exists(sample_level)) {
        const Level level = load_level(sample_level.string());
        width = level.width();
        height = level.height();
    }

    const BatchMetrics metrics = compute_batch_metrics(outcomes);
    const ExpressiveRange era = expressive_range(outcomes, width, height);
    emit_era_csv(era, (outcomes_dir / "era.csv").string());
    emit_era_svg(era, (outcomes_dir / "era.svg").string());

    json report{{"tool", {{"name", "mutation-models"}, {"version", kToolVersion}}},
                {"created_at", timestamp_iso()},
                {"provenance", {{"source", (outcomes_dir / "outcomes.csv").string()}}},
                {"diversity_denominator", "successful levels"},
                {"metrics", metrics_json(metrics)}};
    write_json_atomic(outcomes_dir / "report.json", report);

    if (!quiet) {
        std::cout << "analyzed " << metrics.total << " outcomes: success "
                  << fmt(metrics.success_rate, 2) << "%  diversity " << fmt(metrics.diversity, 2)
                  << "%\n";
    }
    return metrics;
}

WalltimeReport cmd_bench(const std::string& weights_path, int n, std::uint64_t seed,
                         const fs::path& out_dir, const EvolutionConfig& evolution_config,
                         bool quiet) {
    const PolicyWeights weights = load_weights(weights_path);
    const fs::path parent = out_dir.has_parent_path() ? out_dir.parent_path() : fs::path(".");
    const fs::path dir = create_run_dir(parent, out_dir.filename().string());

    const WalltimeReport report = benchmark_walltime(weights, n, evolution_config, seed);
    emit_benchmark_csv(report, (dir / "benchmark.csv").string());

    if (!quiet) {
        std::cout << "network:   mean " << fmt(report.inference_mean_s, 4) << " s/level over "
                  << report.episodes << " episodes (" << report.inference_successes
                  << " successful, " << fmt(report.inference_success_mean_s, 4)
                  << " s per success)\n";
        std::cout << "evolution: mean " << fmt(report.evolution_mean_s, 4) << " s/run over "
                  << report.evolution_runs << " runs (" << report.evolution_reached
                  << " reached connectivity, mean " << fmt(report.evolution_mean_generations, 1)
                  << " generations)\n";
        std::cout << "speedup:   " << fmt(report.speedup, 2)
                  << "x (evolution mean / network per-success mean)\n";
        std::cout << "wrote " << (dir / "benchmark.csv").string() << '\n';
    }
    return report;
}

namespace {

struct ReferenceRow {
    const char* method;
    double success, success_ci;
    double diversity, diversity_ci;
    double iterations, iterations_ci;
};

// Reference results the presets compare against.
constexpr ReferenceRow kTable1Reference[] = {
    {"assisted-2", 99.67, 0.49, 86.83, 3.80, 18.21, 18.57},
    {"normal-2", 30.17, 32.70, 28.50, 30.62, 61.70, 47.22},
    {"normal-4", 66.83, 49.22, 59.33, 43.69, 23.55, 48.59},
    {"normal-8", 65.17, 48.37, 60.00, 44.59, 31.78, 23.84},
};
constexpr double kTable2ReferenceNetworkMean = 0.6612;
constexpr double kTable2ReferenceNetworkStd = 2.3874;
constexpr double kTable2ReferenceEvolutionMean = 12.6957;
constexpr double kTable2ReferenceEvolutionStd = 2.2571;

struct MethodResults {
    std::vector<double> success, diversity, iterations;
};

void reproduce_table1(const ExperimentConfig& config, const fs::path& dir, ExecMode exec) {
    const char* method_names[] = {"assisted-2", "normal-2", "normal-4", "normal-8"};
    MethodResults results[4];

    for (int rep = 0; rep < config.runs; ++rep) {
        const std::uint64_t seed = config.evolution.seed + static_cast<std::uint64_t>(rep);
        std::cout << "== repetition " << (rep + 1) << "/" << config.runs << " (seed " << seed
                  << ") ==\n";

        ExperimentConfig assisted = config;
        assisted.mode = EvolutionMode::Assisted;
        assisted.epochs = 2;
        assisted.training.epochs = 2;
        assisted.evolution.seed = seed;
        assisted.training.seed = seed;
        const EvolveArtifacts assisted_art = cmd_evolve(assisted, dir.string(), exec);

        ExperimentConfig normal = config;
        normal.mode = EvolutionMode::Normal;
        normal.epochs = 2;
        normal.training.epochs = 2;
        normal.evolution.seed = seed;
        normal.training.seed = seed;
        const EvolveArtifacts normal_art = cmd_evolve(normal, dir.string(), exec);

        // Normal-4 and Normal-8 share the Normal evolution trajectories and
        // retrain on the final dataset with more epochs.
        std::vector<fs::path> method_weights = {assisted_art.final_weights,
                                                normal_art.final_weights};
        const TrainingDataset final_ds = load_dataset(normal_art.final_dataset.string());
        for (int epochs : {4, 8}) {
            TrainHyperparams hyper = config.training;
            hyper.epochs = epochs;
            hyper.seed = mix_seed(seed, static_cast<std::uint64_t>(config.evolution.generations));
            const TrainResult trained = train(final_ds, hyper, exec);
            const fs::path w_path = normal_art.run_dir / "weights" /
                                    ("final-" + std::to_string(epochs) + "ep.w");
            save_weights(trained.weights, w_path.string());
            method_weights.push_back(w_path);
        }

        // Matched generation seed across the four methods.
        const std::uint64_t gen_seed = mix_seed(seed, 0xA11CEull);
        for (int m = 0; m < 4; ++m) {
            const fs::path out = dir / (std::string(method_names[m]) + "-levels-r" +
                                        std::to_string(rep + 1));
            const GenerateArtifacts gen =
                cmd_generate(method_weights[m].string(), config.inference_levels, gen_seed, out,
                             config.inference_config(), exec);
            results[m].success.push_back(gen.metrics.success_rate);
            results[m].diversity.push_back(gen.metrics.diversity);
            if (gen.metrics.mean_iterations) {
                results[m].iterations.push_back(*gen.metrics.mean_iterations);
            }
        }
    }

    std::ofstream csv(dir / "table1.csv", std::ios::binary);
    csv << "method,success_mean,success_ci,diversity_mean,diversity_ci,iterations_mean,"
           "iterations_ci,ref_success,ref_success_ci,ref_diversity,ref_diversity_ci,"
           "ref_iterations,ref_iterations_ci\n";
    std::cout << "\nmethod       success          diversity        iterations     (reference in "
                 "parentheses)\n";
    for (int m = 0; m < 4; ++m) {
        const ReferenceRow& ref = kTable1Reference[m];
        const double s = mean_of(results[m].success), s_ci = ci95(results[m].success);
        const double d = mean_of(results[m].diversity), d_ci = ci95(results[m].diversity);
        const double it = mean_of(results[m].iterations), it_ci = ci95(results[m].iterations);
        csv << method_names[m] << ',' << s << ',' << s_ci << ',' << d << ',' << d_ci << ','
            << it << ',' << it_ci << ',' << ref.success << ',' << ref.success_ci << ','
            << ref.diversity << ',' << ref.diversity_ci << ',' << ref.iterations << ','
            << ref.iterations_ci << '\n';
        std::printf("%-12s %6.2f%% +-%5.2f  %6.2f%% +-%5.2f  %6.2f +-%6.2f  (%.2f%%, %.2f%%, %.2f)\n",
                    method_names[m], s, s_ci, d, d_ci, it, it_ci, ref.success, ref.diversity,
                    ref.iterations);
    }
    std::cout << "wrote " << (dir / "table1.csv").string() << '\n';
}

void reproduce_table2(const ExperimentConfig& config, const fs::path& dir,
                      const std::string& weights_path, ExecMode exec) {
    std::string weights_file = weights_path;
    if (weights_file.empty()) {
        ExperimentConfig assisted = config;
        assisted.mode = EvolutionMode::Assisted;
        assisted.epochs = 2;
        assisted.training.epochs = 2;
        const EvolveArtifacts art = cmd_evolve(assisted, dir.string(), exec);
        weights_file = art.final_weights.string();
    }

    const std::uint64_t bench_seed = mix_seed(config.evolution.seed, 0xBE7Cull);
    const WalltimeReport report = cmd_bench(weights_file, config.inference_levels, bench_seed,
                                            dir / "bench", config.evolution);

    std::ofstream csv(dir / "table2.csv", std::ios::binary);
    csv << "side,mean_s,std_s,ref_mean_s,ref_std_s\n";
    csv << "network," << report.inference_mean_s << ',' << report.inference_std_s << ','
        << kTable2ReferenceNetworkMean << ',' << kTable2ReferenceNetworkStd << '\n';
    csv << "evolution," << report.evolution_mean_s << ',' << report.evolution_std_s << ','
        << kTable2ReferenceEvolutionMean << ',' << kTable2ReferenceEvolutionStd << '\n';
    csv << "# measured speedup: " << report.speedup << ", reference speedup: "
        << kTable2ReferenceEvolutionMean / kTable2ReferenceNetworkMean << '\n';
    std::cout << "reference: network " << kTable2ReferenceNetworkMean << " s vs evolution "
              << kTable2ReferenceEvolutionMean << " s ("
              << fmt(kTable2ReferenceEvolutionMean / kTable2ReferenceNetworkMean, 1) << "x)\n";
    std::cout << "wrote " << (dir / "table2.csv").string() << '\n';
}

void reproduce_fig3(const ExperimentConfig& config, const fs::path& dir, ExecMode exec) {
    for (const EvolutionMode mode : {EvolutionMode::Normal, EvolutionMode::Assisted}) {
        const char* mode_name = mode == EvolutionMode::Assisted ? "assisted" : "normal";
        std::vector<std::vector<GenerationStats>> all_stats;
        for (int rep = 0; rep < config.runs; ++rep) {
            ExperimentConfig c = config;
            c.mode = mode;
            c.evolution.seed = config.evolution.seed + static_cast<std::uint64_t>(rep);
            c.training.seed = c.evolution.seed;
            const EvolveArtifacts art = cmd_evolve(c, dir.string(), exec);
            all_stats.push_back(art.result.stats);
        }

        const fs::path csv_path = dir / ("fig3_" + std::string(mode_name) + ".csv");
        std::ofstream csv(csv_path, std::ios::binary);
        csv << "generation,best_fitness_mean,best_fitness_ci,dataset_size_mean,dataset_size_ci,"
               "similarity_mean,similarity_ci\n";
        const std::size_t rows = all_stats.front().size();
        for (std::size_t g = 0; g < rows; ++g) {
            std::vector<double> best, size, sim;
            for (const auto& stats : all_stats) {
                best.push_back(stats[g].best_fitness);
                size.push_back(static_cast<double>(stats[g].dataset_size));
                sim.push_back(stats[g].history_similarity);
            }
            csv << all_stats.front()[g].generation << ',' << mean_of(best) << ',' << ci95(best)
                << ',' << mean_of(size) << ',' << ci95(size) << ',' << mean_of(sim) << ','
                << ci95(sim) << '\n';
        }
        std::cout << "wrote " << csv_path.string() << '\n';
    }
}

}  // namespace

void cmd_reproduce(ReproduceTarget target, const ExperimentConfig& config,
                   const std::string& out_override, const std::string& weights_path,
                   ExecMode exec) {
    config.validate();
    const fs::path root = resolve_output_root(out_override, config.output_dir);
    const char* name = target == ReproduceTarget::Table1   ? "table1"
                       : target == ReproduceTarget::Table2 ? "table2"
                                                           : "fig3";
    const fs::path dir =
        create_run_dir(root, std::string("reproduce-") + name + "-" + timestamp_compact());
    std::cout << "reproduce " << name << " -> " << dir.string() << '\n';

    switch (target) {
        case ReproduceTarget::Table1:
            reproduce_table1(config, dir, exec);
            break;
        case ReproduceTarget::Table2:
            reproduce_table2(config, dir, weights_path, exec);
            break;
        case ReproduceTarget::Fig3:
            reproduce_fig3(config, dir, exec);
            break;
    }
}

}  // namespace mm
