#pragma once

#include <vector>

#include "mm/level.hpp"

namespace mm {

inline constexpr int kCropSize = 8;

// Square crop of the level around a mutation location, the policy network
// input. Solid (and out-of-bounds) reads as 1.0, Empty as 0.0.
struct Observation {
    int size = kCropSize;
    std::vector<float> cells;  // row-major size x size

    float at(int row, int col) const { return cells[static_cast<std::size_t>(row) * size + col]; }
    bool operator==(const Observation&) const = default;
};

// Window cell (i, j) holds the tile at (x - size/2 + 1 + j, y - size/2 + 1 + i),
// so the mutation location lands at window index (3, 3) for the 8x8 default.
// Throws std::invalid_argument when (x, y) is out of bounds.
Observation encode_observation(const Level& level, int x, int y, int crop_size = kCropSize);

}  // namespace mm
