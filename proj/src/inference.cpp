#include "mm/inference.hpp"

#include <chrono>
#include <stdexcept>

namespace mm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

GenerationOutcome run_scanline(Level start, const PolicyWeights& weights, Rng& rng,
                               const InferenceConfig& config) {
    const auto t0 = Clock::now();
    GenerationOutcome outcome;
    outcome.final_level = std::move(start);

    const auto finish_success = [&](int pass) {
        outcome.success = true;
        outcome.iterations = pass;
        outcome.path_length = longest_shortest_path(outcome.final_level);
        outcome.empty_tiles = outcome.final_level.count_empty();
        outcome.wall_time_ms = ms_since(t0);
    };

    if (count_regions(outcome.final_level) == 1) {
        finish_success(0);
        return outcome;
    }

    for (int pass = 1; pass <= config.max_passes; ++pass) {
        for (int y = 0; y < outcome.final_level.height(); ++y) {
            for (int x = 0; x < outcome.final_level.width(); ++x) {
                const Observation obs =
                    encode_observation(outcome.final_level, x, y, config.crop_size);
                const ActionDistribution dist = forward(weights, obs);
                const MutationAction action = sample_action(dist, rng);
                const Tile before = outcome.final_level.at(x, y);
                apply_action_in_place(outcome.final_level, x, y, action);
                // Connectivity can only change when the tile actually flipped.
                if (outcome.final_level.at(x, y) != before &&
                    count_regions(outcome.final_level) == 1) {
                    finish_success(pass);
                    return outcome;
                }
            }
        }
    }

    outcome.success = false;
    outcome.iterations = config.max_passes;
    outcome.wall_time_ms = ms_since(t0);
    return outcome;
}

GenerationOutcome generate_level(const PolicyWeights& weights, Rng& rng,
                                 const InferenceConfig& config) {
    return run_scanline(
        new_random_level(config.width, config.height, config.solid_probability, rng), weights,
        rng, config);
}

std::vector<GenerationOutcome> batch_generate(const PolicyWeights& weights, int n,
                                              std::uint64_t seed, const InferenceConfig& config,
                                              ExecMode mode) {
    if (n <= 0) throw std::invalid_argument("episode count must be positive");
    std::vector<GenerationOutcome> outcomes(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::Parallel)
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(i));
        outcomes[i] = generate_level(weights, rng, config);
    }
    (void)mode;
    return outcomes;
}

}  // namespace mm
