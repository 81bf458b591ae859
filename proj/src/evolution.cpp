#include "mm/evolution.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mm/metrics.hpp"

namespace mm {

void EvolutionConfig::validate() const {
    if (mu <= 0 || lambda <= 0) throw std::invalid_argument("mu and lambda must be positive");
    if (generations <= 0) throw std::invalid_argument("generation count must be positive");
    if (top_x <= 0 || top_x > mu + lambda) {
        throw std::invalid_argument("top_x must be in [1, mu + lambda]");
    }
    if (train_interval <= 0 || train_interval > generations) {
        throw std::invalid_argument("train_interval must be in [1, generations]");
    }
    if (random_action_chance < 0.0 || random_action_chance > 1.0) {
        throw std::invalid_argument("random_action_chance must be in [0, 1]");
    }
    if (width <= 0 || height <= 0) throw std::invalid_argument("level dimensions must be positive");
    if (solid_probability < 0.0 || solid_probability > 1.0) {
        throw std::invalid_argument("solid_probability must be in [0, 1]");
    }
    if (crop_size < 4 || crop_size % 4 != 0) {
        throw std::invalid_argument("crop_size must be a positive multiple of 4");
    }
}

MutationAction RandomActionSource::resolve(const Level&, int, int,
                                           std::span<const std::uint64_t> raws) const {
    return static_cast<MutationAction>(bounded(raws[0], kNumActions));
}

MutationAction PolicyActionSource::resolve(const Level& level, int x, int y,
                                           std::span<const std::uint64_t> raws) const {
    if (unit_real(raws[0]) < random_action_chance_) {
        return static_cast<MutationAction>(bounded(raws[1], kNumActions));
    }
    const Observation obs = encode_observation(level, x, y, crop_size_);
    const ActionDistribution dist = forward(*weights_, obs);
    return pick_action(dist, unit_real(raws[1]));
}

namespace {

struct MutationDraw {
    int x = 0;
    int y = 0;
    std::array<std::uint64_t, 4> raws{};
    int n_raws = 0;
};

MutationDraw draw_mutation(const ActionSource& source, Rng& rng, int width, int height) {
    MutationDraw d;
    d.x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width)));
    d.y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height)));
    d.n_raws = source.raw_draw_count();
    if (d.n_raws < 0 || d.n_raws > static_cast<int>(d.raws.size())) {
        throw std::logic_error("action source requests too many raw draws");
    }
    for (int i = 0; i < d.n_raws; ++i) d.raws[i] = rng.next_raw();
    return d;
}

Chromosome make_child(const Chromosome& parent, const ActionSource& source,
                      const MutationDraw& draw, std::uint64_t creation_index) {
    const MutationAction action =
        source.resolve(parent.current_level, draw.x, draw.y,
                       std::span<const std::uint64_t>(draw.raws.data(), draw.n_raws));
    Chromosome child;
    child.initial_level = parent.initial_level;
    child.history = parent.history;
    child.history.push_back({static_cast<std::uint8_t>(draw.x),
                             static_cast<std::uint8_t>(draw.y), action});
    child.current_level = apply_action(parent.current_level, draw.x, draw.y, action);
    child.fitness = evaluate_fitness(child.current_level);
    child.creation_index = creation_index;
    return child;
}

}  // namespace

Population init_population(const EvolutionConfig& config, Rng& rng, ExecMode mode) {
    config.validate();
    const int total = config.mu + config.lambda;
    Population population;
    population.reserve(total);
    for (int i = 0; i < total; ++i) {
        Chromosome c;
        c.initial_level =
            new_random_level(config.width, config.height, config.solid_probability, rng);
        c.current_level = c.initial_level;
        c.creation_index = static_cast<std::uint64_t>(i);
        population.push_back(std::move(c));
    }
    const auto n = static_cast<std::ptrdiff_t>(population.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        population[i].fitness = evaluate_fitness(population[i].current_level);
    }
    (void)mode;
    return population;
}

std::vector<std::size_t> selection_order(const Population& population) {
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (population[a].fitness.fitness != population[b].fitness.fitness) {
            return population[a].fitness.fitness > population[b].fitness.fitness;
        }
        return population[a].creation_index > population[b].creation_index;
    });
    return order;
}

std::vector<Chromosome> select_parents(const Population& population, int mu) {
    if (mu <= 0 || static_cast<std::size_t>(mu) > population.size()) {
        throw std::invalid_argument("mu exceeds the population size");
    }
    const auto order = selection_order(population);
    std::vector<Chromosome> parents;
    parents.reserve(mu);
    for (int i = 0; i < mu; ++i) parents.push_back(population[order[i]]);
    return parents;
}

Chromosome mutate(const Chromosome& parent, const ActionSource& source, Rng& rng,
                  std::uint64_t creation_index) {
    const MutationDraw draw = draw_mutation(source, rng, parent.current_level.width(),
                                            parent.current_level.height());
    return make_child(parent, source, draw, creation_index);
}

Population step_generation(const Population& population, const EvolutionConfig& config,
                           const ActionSource& source, Rng& rng,
                           std::uint64_t& next_creation_index, ExecMode mode) {
    if (population.size() != static_cast<std::size_t>(config.mu + config.lambda)) {
        throw std::invalid_argument("population size must equal mu + lambda");
    }
    const auto order = selection_order(population);
    Population next;
    next.reserve(population.size());
    for (int i = 0; i < config.mu; ++i) next.push_back(population[order[i]]);

    // All random draws happen here, in offspring order.
    std::vector<MutationDraw> draws(config.lambda);
    for (auto& d : draws) d = draw_mutation(source, rng, config.width, config.height);
    const std::uint64_t base_index = next_creation_index;
    next_creation_index += static_cast<std::uint64_t>(config.lambda);

    std::vector<Chromosome> children(config.lambda);
    const auto n = static_cast<std::ptrdiff_t>(config.lambda);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        children[i] = make_child(next[i % config.mu], source, draws[i],
                                 base_index + static_cast<std::uint64_t>(i));
    }
    (void)mode;
    for (auto& child : children) next.push_back(std::move(child));
    return next;
}

Level replay_history(const Chromosome& chromosome) {
    Level level = chromosome.initial_level;
    for (std::size_t k = 0; k < chromosome.history.size(); ++k) {
        const MutationRecord& r = chromosome.history[k];
        if (!level.in_bounds(r.x, r.y)) {
            throw std::runtime_error("corrupt history in chromosome " +
                                     std::to_string(chromosome.creation_index) + ": record " +
                                     std::to_string(k) + " is out of bounds");
        }
        apply_action_in_place(level, r.x, r.y, r.action);
    }
    return level;
}

GenerationStats compute_generation_stats(int generation, const Population& population,
                                         int top_x, ExecMode mode) {
    if (population.empty()) throw std::invalid_argument("population is empty");
    const auto order = selection_order(population);
    const std::size_t k = std::min<std::size_t>(top_x, population.size());

    GenerationStats stats;
    stats.generation = generation;
    stats.best_fitness = population[order[0]].fitness.fitness;
    double sum = 0.0;
    std::size_t records = 0;
    std::vector<std::vector<std::uint32_t>> tokens;
    tokens.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Chromosome& c = population[order[i]];
        sum += c.fitness.fitness;
        records += c.history.size();
        tokens.push_back(history_tokens(c));
    }
    stats.mean_top_fitness = sum / static_cast<double>(k);
    stats.dataset_size = records;
    stats.history_similarity = k >= 2 ? mean_pairwise_similarity(tokens, mode) : 1.0;
    return stats;
}

EvolutionResult run_evolution(const EvolutionConfig& config, EvolutionMode mode,
                              const TrainHyperparams& hyper, const EvolutionHooks& hooks,
                              ExecMode exec) {
    config.validate();
    hyper.validate();

    Rng rng(config.seed);
    EvolutionResult result;
    result.population = init_population(config, rng, exec);
    std::uint64_t next_creation_index = result.population.size();

    const auto record = [&](int generation) {
        GenerationStats stats =
            compute_generation_stats(generation, result.population, config.top_x, exec);
        if (hooks.on_generation) hooks.on_generation(stats, result.population);
        result.stats.push_back(std::move(stats));
    };
    record(0);

    RandomActionSource random_source;
    PolicyWeights current_weights;  // stable storage for the policy source
    std::unique_ptr<PolicyActionSource> policy_source;
    int event_index = 0;

    for (int gen = 1; gen <= config.generations; ++gen) {
        const ActionSource& source =
            (mode == EvolutionMode::Assisted && policy_source) ? *policy_source
                                                               : static_cast<const ActionSource&>(random_source);
        result.population =
            step_generation(result.population, config, source, rng, next_creation_index, exec);
        record(gen);

        const bool train_now = mode == EvolutionMode::Assisted
                                   ? gen % config.train_interval == 0
                                   : gen == config.generations;
        if (!train_now) continue;

        ++event_index;
        const auto top = select_parents(result.population, config.top_x);
        TrainingDataset dataset = extract_dataset(top, "", gen, config.crop_size);
        TrainHyperparams event_hyper = hyper;
        event_hyper.seed = mix_seed(hyper.seed, static_cast<std::uint64_t>(gen));
        TrainResult trained = train(dataset, event_hyper, exec);
        if (hooks.on_training_event) {
            hooks.on_training_event(event_index, gen, trained.weights, dataset,
                                    trained.epoch_loss);
        }
        current_weights = std::move(trained.weights);
        if (mode == EvolutionMode::Assisted) {
            policy_source = std::make_unique<PolicyActionSource>(
                current_weights, config.random_action_chance, config.crop_size);
        }
    }

    if (event_index > 0) result.final_weights = current_weights;
    return result;
}

}  // namespace mm
