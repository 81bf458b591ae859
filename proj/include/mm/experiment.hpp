#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mm/config.hpp"
#include "mm/metrics.hpp"

namespace mm {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputRootEnvVar = "MUTATION_MODELS_OUT";

// --out flag > config output_dir > $MUTATION_MODELS_OUT > "runs".
std::filesystem::path resolve_output_root(const std::string& flag_value,
                                          const std::string& config_value);

// Creates root/run_id, appending -2, -3, ... instead of reusing an existing
// directory.
std::filesystem::path create_run_dir(const std::filesystem::path& root,
                                     const std::string& run_id);

struct EvolveArtifacts {
    std::filesystem::path run_dir;
    std::filesystem::path stats_csv;
    std::vector<std::filesystem::path> weights_files;  // one per training event
    std::filesystem::path final_weights;
    std::filesystem::path final_dataset;
    EvolutionResult result;
};

// Full evolution run persisted under a fresh run directory: manifest.json,
// stats.csv, per-event datasets and weights, final top-X levels.
EvolveArtifacts cmd_evolve(const ExperimentConfig& config, const std::string& out_override,
                           ExecMode exec, bool quiet = false);

struct GenerateArtifacts {
    std::filesystem::path out_dir;
    std::vector<GenerationOutcome> outcomes;
    BatchMetrics metrics;
};

// Batch generation from a trained model: levels/<i>.txt, outcomes.csv,
// report.json, era.csv, era.svg.
GenerateArtifacts cmd_generate(const std::string& weights_path, int n, std::uint64_t seed,
                               const std::filesystem::path& out_dir,
                               const InferenceConfig& inference, ExecMode exec,
                               bool quiet = false);

// Recomputes metrics and expressive-range artifacts from an existing
// outcomes directory.
BatchMetrics cmd_analyze(const std::filesystem::path& outcomes_dir, bool quiet = false);

// Wall-clock comparison (single-threaded) written to benchmark.csv.
WalltimeReport cmd_bench(const std::string& weights_path, int n, std::uint64_t seed,
                         const std::filesystem::path& out_dir,
                         const EvolutionConfig& evolution_config, bool quiet = false);

enum class ReproduceTarget { Table1, Table2, Fig3 };

// End-to-end reproduction presets; aggregate mean and 95% CI across
// config.runs repetitions and write a side-by-side comparison against the
// bundled reference results.
void cmd_reproduce(ReproduceTarget target, const ExperimentConfig& config,
                   const std::string& out_override, const std::string& weights_path,
                   ExecMode exec);

// Reads outcomes.csv rows back into outcome records (final levels omitted).
std::vector<GenerationOutcome> load_outcomes_csv(const std::filesystem::path& path);

}  // namespace mm
