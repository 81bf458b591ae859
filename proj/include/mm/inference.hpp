#pragma once

#include <cstdint>
#include <vector>

#include "mm/exec.hpp"
#include "mm/level.hpp"
#include "mm/policy.hpp"
#include "mm/rng.hpp"

namespace mm {

struct GenerationOutcome {
    Level final_level;
    bool success = false;   // exactly one empty-tile region
    int iterations = 0;     // completed scanline passes when stopping (0..max_passes)
    int path_length = 0;    // successes only
    int empty_tiles = 0;    // successes only
    double wall_time_ms = 0.0;
};

struct InferenceConfig {
    int width = kLevelSize;
    int height = kLevelSize;
    double solid_probability = 0.5;
    int max_passes = kLevelSize * kLevelSize;
    int crop_size = kCropSize;
};

// Scanline repair of an arbitrary start level: visit tiles in row-major
// order, sample one policy action per tile, stop as soon as the level is a
// single region (checked after every tile flip). A start that is already
// connected succeeds with iterations = 0; otherwise iterations is the
// 1-based pass during which success occurred, or max_passes on failure.
// No fitness function is involved.
GenerationOutcome run_scanline(Level start, const PolicyWeights& weights, Rng& rng,
                               const InferenceConfig& config = {});

// Same, starting from a fresh noise level drawn from rng.
GenerationOutcome generate_level(const PolicyWeights& weights, Rng& rng,
                                 const InferenceConfig& config = {});

// n independent episodes; episode i runs on the rng stream derived from
// (seed, i), so results are identical for any worker count.
std::vector<GenerationOutcome> batch_generate(const PolicyWeights& weights, int n,
                                              std::uint64_t seed,
                                              const InferenceConfig& config = {},
                                              ExecMode mode = ExecMode::Parallel);

}  // namespace mm
