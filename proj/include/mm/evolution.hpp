#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mm/dataset.hpp"
#include "mm/exec.hpp"
#include "mm/level.hpp"
#include "mm/policy.hpp"
#include "mm/rng.hpp"

namespace mm {

struct MutationRecord {
    std::uint8_t x = 0;
    std::uint8_t y = 0;
    MutationAction action = MutationAction::NoChange;

    bool operator==(const MutationRecord&) const = default;
};

// A level plus the full mutation trajectory that produced it. current_level
// always equals initial_level with history replayed in order, and fitness is
// always evaluate_fitness(current_level).
struct Chromosome {
    Level initial_level;
    std::vector<MutationRecord> history;
    Level current_level;
    FitnessReport fitness;
    std::uint64_t creation_index = 0;
};

using Population = std::vector<Chromosome>;

struct EvolutionConfig {
    int mu = 50;
    int lambda = 50;
    int generations = 2000;
    int top_x = 10;
    int train_interval = 100;
    double random_action_chance = 0.25;
    std::uint64_t seed = 0;

    int width = kLevelSize;
    int height = kLevelSize;
    double solid_probability = 0.5;
    int crop_size = kCropSize;

    void validate() const;
};

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_top_fitness = 0.0;       // mean fitness of the top-X chromosomes
    std::size_t dataset_size = 0;        // sum of top-X history lengths
    double history_similarity = 0.0;     // mean pairwise trajectory similarity of the top X
};

enum class EvolutionMode { Normal, Assisted };

// Supplies the mutation action for a drawn location. Implementations consume
// a fixed number of pre-drawn raw values so that the engine can draw the full
// random sequence up front (sequential, deterministic) and resolve actions in
// parallel (resolve is pure).
class ActionSource {
public:
    virtual ~ActionSource() = default;
    virtual int raw_draw_count() const = 0;
    virtual MutationAction resolve(const Level& level, int x, int y,
                                   std::span<const std::uint64_t> raws) const = 0;
};

// Uniform over the three actions.
class RandomActionSource : public ActionSource {
public:
    int raw_draw_count() const override { return 1; }
    MutationAction resolve(const Level& level, int x, int y,
                           std::span<const std::uint64_t> raws) const override;
};

// Samples from the policy's softmax over the cropped observation; with
// probability random_action_chance the action is replaced by a uniform one.
class PolicyActionSource : public ActionSource {
public:
    PolicyActionSource(const PolicyWeights& weights, double random_action_chance,
                       int crop_size = kCropSize)
        : weights_(&weights), random_action_chance_(random_action_chance), crop_size_(crop_size) {}

    int raw_draw_count() const override { return 2; }
    MutationAction resolve(const Level& level, int x, int y,
                           std::span<const std::uint64_t> raws) const override;

private:
    const PolicyWeights* weights_;
    double random_action_chance_;
    int crop_size_;
};

// mu + lambda random levels with empty histories, fitness evaluated.
Population init_population(const EvolutionConfig& config, Rng& rng,
                           ExecMode mode = ExecMode::Parallel);

// Population indices ordered by fitness descending, ties broken by lower
// creation_index (older first).
std::vector<std::size_t> selection_order(const Population& population);

// The mu best chromosomes in selection order. Throws std::invalid_argument
// when mu exceeds the population size.
std::vector<Chromosome> select_parents(const Population& population, int mu);

// One offspring: uniform location, action from the source, history extended
// by one record. The parent is untouched. Raw draw order per offspring:
// location x, location y, then the source's raws.
Chromosome mutate(const Chromosome& parent, const ActionSource& source, Rng& rng,
                  std::uint64_t creation_index);

// Next population: the mu selected parents (histories intact) plus lambda
// offspring, parent of offspring i being selected parent i mod mu. All rng
// draws happen in offspring order before the parallel resolve/evaluate step.
Population step_generation(const Population& population, const EvolutionConfig& config,
                           const ActionSource& source, Rng& rng,
                           std::uint64_t& next_creation_index,
                           ExecMode mode = ExecMode::Parallel);

// Applies the history to the initial level. Throws std::runtime_error for
// out-of-bounds records (corrupt history).
Level replay_history(const Chromosome& chromosome);

GenerationStats compute_generation_stats(int generation, const Population& population,
                                         int top_x, ExecMode mode = ExecMode::Parallel);

struct EvolutionHooks {
    std::function<void(const GenerationStats&, const Population&)> on_generation;
    // event index (1-based), generation, freshly trained weights, the dataset
    // it was trained on, per-epoch loss curve
    std::function<void(int, int, const PolicyWeights&, const TrainingDataset&,
                       const std::vector<double>&)>
        on_training_event;
};

struct EvolutionResult {
    Population population;
    std::vector<GenerationStats> stats;  // generation 0 (initial) through G
    std::optional<PolicyWeights> final_weights;
};

// Normal mode: random mutations throughout, one training event after the
// final generation. Assisted mode: random mutations until the first training
// event, then at every generation divisible by train_interval the top-X
// histories are extracted and a fresh model is trained from scratch and used
// as the mutation source until the next event. Training event k uses seed
// mix_seed(hyper.seed, generation).
EvolutionResult run_evolution(const EvolutionConfig& config, EvolutionMode mode,
                              const TrainHyperparams& hyper, const EvolutionHooks& hooks = {},
                              ExecMode exec = ExecMode::Parallel);

}  // namespace mm
