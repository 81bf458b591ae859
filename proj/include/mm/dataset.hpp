#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mm/level.hpp"
#include "mm/observation.hpp"

namespace mm {

struct Chromosome;

struct TrainingExample {
    Observation observation;
    MutationAction action = MutationAction::NoChange;

    bool operator==(const TrainingExample&) const = default;
};

struct TrainingDataset {
    std::vector<TrainingExample> examples;
    std::string run_id;
    int generation = 0;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
    bool operator==(const TrainingDataset&) const = default;
};

// Replays each chromosome from its initial level and emits one
// (observation-before-step, action) pair per history record, concatenated in
// the order the chromosomes are given (selection order). No deduplication.
// A history record with an out-of-bounds location raises a corruption error
// naming the chromosome.
TrainingDataset extract_dataset(std::span<const Chromosome> top, std::string run_id,
                                int generation, int crop_size = kCropSize);

// Line format: one header line "mmds v1 run=<id> gen=<g>", then one record
// per line: size*size characters of '0'/'1' ('1' = Solid), a space, and the
// action digit. Parse failures report the offending line number.
void save_dataset(const TrainingDataset& dataset, const std::string& path);
TrainingDataset load_dataset(const std::string& path);

// Examples per action class, indexed by the action code.
std::array<std::size_t, kNumActions> action_class_counts(const TrainingDataset& dataset);

}  // namespace mm
