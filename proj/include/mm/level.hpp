#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mm/rng.hpp"

namespace mm {

enum class Tile : std::uint8_t { Empty = 0, Solid = 1 };

enum class MutationAction : std::uint8_t {
    NoChange = 0,
    ChangeToEmpty = 1,
    ChangeToSolid = 2,
};
inline constexpr int kNumActions = 3;

inline constexpr int kLevelSize = 14;       // default maze edge length
inline constexpr int kRegionCap = 20;       // region counts at or above this score zero
inline constexpr int kPathNormalizer = 98;  // path length that saturates the connected branch

// Rectangular tile grid. Everything outside the stored rectangle reads as
// Solid, so the maze is implicitly surrounded by walls.
class Level {
public:
    Level() : width_(0), height_(0) {}  // empty grid; every read is Solid
    Level(int width, int height, Tile fill = Tile::Solid);

    int width() const { return width_; }
    int height() const { return height_; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    Tile at(int x, int y) const {
        return in_bounds(x, y) ? tiles_[static_cast<std::size_t>(y) * width_ + x]
                               : Tile::Solid;
    }

    void set(int x, int y, Tile t);

    int count_empty() const;

    std::string to_text() const;
    static Level from_text(const std::string& text);

    bool operator==(const Level&) const = default;

private:
    int width_;
    int height_;
    std::vector<Tile> tiles_;  // row-major
};

struct FitnessReport {
    int regions = 0;
    int longest_path = 0;  // in moves, not tiles
    double fitness = 0.0;

    bool operator==(const FitnessReport&) const = default;
};

// Each tile is Solid with the given probability, drawn row-major. Throws
// std::invalid_argument for non-positive dimensions.
Level new_random_level(int width, int height, double solid_probability, Rng& rng);

// Number of 4-connected components of Empty tiles.
int count_regions(const Level& level);

// Max over all pairs of Empty tiles of the shortest 4-connected path between
// them, counted in moves. Pairs in different regions are ignored; 0 when no
// pair is reachable.
int longest_shortest_path(const Level& level);

// Cascading fitness: regions are driven to 1 first, then path length is
// maximized. f = 0.5*(1 - n/20) for 1 < n < 20, f = 0.5 + 0.5*p/98 for n == 1
// (clamped to 1 when p > 98), f = 0 otherwise.
FitnessReport evaluate_fitness(const Level& level);

// Returns a copy with tile (x, y) rewritten per the action. Throws
// std::invalid_argument when (x, y) is out of bounds.
Level apply_action(const Level& level, int x, int y, MutationAction action);
void apply_action_in_place(Level& level, int x, int y, MutationAction action);

void save_level(const Level& level, const std::string& path);
Level load_level(const std::string& path);

}  // namespace mm
