#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mm/evolution.hpp"
#include "mm/exec.hpp"
#include "mm/inference.hpp"

namespace mm {

struct BatchMetrics {
    int total = 0;
    int successes = 0;
    double success_rate = 0.0;  // percent of all episodes
    double diversity = 0.0;     // percent of successes with a unique (path, empty) pair
    std::optional<double> mean_iterations;  // successes only
    std::optional<double> iteration_std;    // sample std over successes
};

// Throws std::invalid_argument on an empty outcome list. Iteration stats are
// absent when nothing succeeded.
BatchMetrics compute_batch_metrics(std::span<const GenerationOutcome> outcomes);

// Gestalt pattern matching: repeatedly take the longest common contiguous
// block (earliest in a, then in b, on ties) and recurse on both flanks;
// similarity is 2 * matched / (|a| + |b|). Two empty sequences compare as 1.
double ratcliff_obershelp(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// One token per history record, comparing by exact (x, y, action) equality.
std::vector<std::uint32_t> history_tokens(const Chromosome& chromosome);

// Mean ratcliff_obershelp over all unordered pairs.
double mean_pairwise_similarity(const std::vector<std::vector<std::uint32_t>>& sequences,
                                ExecMode mode = ExecMode::Parallel);

// Mean pairwise trajectory similarity of the given chromosomes. Throws
// std::invalid_argument for fewer than two.
double history_similarity(std::span<const Chromosome> top, ExecMode mode = ExecMode::Parallel);

// Successful outcomes plotted by (empty tiles, longest path), plus a binned
// density grid over the full axis ranges.
struct ExpressiveRange {
    std::vector<std::pair<int, int>> points;  // (empty_tiles, path_length) per success
    int bin_width = 4;
    int empty_tile_max = 0;  // inclusive axis bounds
    int path_max = 0;
    std::vector<int> grid;   // empty_bins() x path_bins(), row-major by empty bin

    int empty_bins() const { return empty_tile_max / bin_width + 1; }
    int path_bins() const { return path_max / bin_width + 1; }
    int cell(int empty_bin, int path_bin) const {
        return grid[static_cast<std::size_t>(empty_bin) * path_bins() + path_bin];
    }
};

ExpressiveRange expressive_range(std::span<const GenerationOutcome> outcomes,
                                 int width = kLevelSize, int height = kLevelSize);
void emit_era_csv(const ExpressiveRange& era, const std::string& path);
void emit_era_svg(const ExpressiveRange& era, const std::string& path);

// Single-threaded wall-clock comparison: n policy generation episodes versus
// n fitness-driven evolution runs, each evolution run stopping at the first
// fully connected level (or the generation cap).
struct WalltimeReport {
    int episodes = 0;
    int inference_successes = 0;
    double inference_mean_s = 0.0;          // over all episodes
    double inference_success_mean_s = 0.0;  // over successful episodes
    double inference_std_s = 0.0;
    int evolution_runs = 0;
    int evolution_reached = 0;  // runs that found a connected level within the cap
    double evolution_mean_s = 0.0;
    double evolution_std_s = 0.0;
    double evolution_mean_generations = 0.0;
    double speedup = 0.0;  // evolution_mean_s / inference_success_mean_s
};

WalltimeReport benchmark_walltime(const PolicyWeights& weights, int n,
                                  const EvolutionConfig& evolution_config, std::uint64_t seed);
void emit_benchmark_csv(const WalltimeReport& report, const std::string& path);

}  // namespace mm
