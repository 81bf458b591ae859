#pragma once

#include <stdexcept>
#include <string>

#include "mm/evolution.hpp"
#include "mm/inference.hpp"
#include "mm/policy.hpp"

namespace mm {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_number(line) {}
    int line_number;
};

// Whole-experiment configuration. Defaults reproduce the reference setup:
// mu = lambda = 50, 2000 generations, top 10, retraining every 100
// generations, 25% random-action mixing, 50% noise, 196-pass cap, 8x8 crop,
// learning rate 1e-4, batch 32.
struct ExperimentConfig {
    EvolutionMode mode = EvolutionMode::Normal;
    int epochs = 2;
    int runs = 3;
    int inference_levels = 100;
    std::string output_dir;  // empty: $MUTATION_MODELS_OUT or "runs"

    EvolutionConfig evolution;
    TrainHyperparams training;  // epochs mirrors the experiment-level value
    int max_passes = kLevelSize * kLevelSize;

    InferenceConfig inference_config() const;
    void validate() const;
};

// INI-style sections ([experiment], [evolution], [training], [domain]) with
// key = value lines and '#'/';' comments. Unknown sections or keys and
// malformed values raise ConfigError with the offending line number.
ExperimentConfig parse_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config_text(const std::string& text, const std::string& name);

// The default configuration rendered as a commented config file.
std::string default_config_text();

}  // namespace mm
