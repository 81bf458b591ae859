#include "mm/level.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mm {

Level::Level(int width, int height, Tile fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("level dimensions must be positive");
    }
    tiles_.assign(static_cast<std::size_t>(width) * height, fill);
}

void Level::set(int x, int y, Tile t) {
    if (!in_bounds(x, y)) {
        throw std::invalid_argument("tile coordinates out of bounds");
    }
    tiles_[static_cast<std::size_t>(y) * width_ + x] = t;
}

int Level::count_empty() const {
    int n = 0;
    for (Tile t : tiles_) n += (t == Tile::Empty);
    return n;
}

std::string Level::to_text() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(height_) * (width_ + 1));
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            out.push_back(at(x, y) == Tile::Solid ? '#' : '.');
        }
        out.push_back('\n');
    }
    return out;
}

Level Level::from_text(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("level text is empty");
    const int width = static_cast<int>(rows[0].size());
    Level level(width, static_cast<int>(rows.size()));
    for (int y = 0; y < level.height(); ++y) {
        if (static_cast<int>(rows[y].size()) != width) {
            throw std::invalid_argument("level text has ragged rows (row " +
                                        std::to_string(y) + ")");
        }
        for (int x = 0; x < width; ++x) {
            char c = rows[y][x];
            if (c == '#') {
                level.set(x, y, Tile::Solid);
            } else if (c == '.') {
                level.set(x, y, Tile::Empty);
            } else {
                throw std::invalid_argument(std::string("unexpected tile character '") +
                                            c + "' at row " + std::to_string(y));
            }
        }
    }
    return level;
}

Level new_random_level(int width, int height, double solid_probability, Rng& rng) {
    Level level(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            level.set(x, y, rng.uniform_real() < solid_probability ? Tile::Solid
                                                                   : Tile::Empty);
        }
    }
    return level;
}

namespace {

constexpr std::array<int, 4> kDx = {1, -1, 0, 0};
constexpr std::array<int, 4> kDy = {0, 0, 1, -1};

}  // namespace

int count_regions(const Level& level) {
    const int w = level.width();
    const int h = level.height();
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack;
    int regions = 0;
    for (int start = 0; start < w * h; ++start) {
        if (seen[start] || level.at(start % w, start / w) != Tile::Empty) continue;
        ++regions;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            int cx = cur % w, cy = cur / w;
            for (int d = 0; d < 4; ++d) {
                int nx = cx + kDx[d], ny = cy + kDy[d];
                if (!level.in_bounds(nx, ny)) continue;
                int idx = ny * w + nx;
                if (!seen[idx] && level.at(nx, ny) == Tile::Empty) {
                    seen[idx] = 1;
                    stack.push_back(idx);
                }
            }
        }
    }
    return regions;
}

int longest_shortest_path(const Level& level) {
    const int w = level.width();
    const int h = level.height();
    const int n = w * h;
    std::vector<int> dist(n);
    std::vector<int> queue(n);
    int best = 0;
    for (int s = 0; s < n; ++s) {
        if (level.at(s % w, s / w) != Tile::Empty) continue;
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        queue[0] = s;
        int head = 0, tail = 1;
        while (head < tail) {
            int cur = queue[head++];
            int cx = cur % w, cy = cur / w;
            for (int d = 0; d < 4; ++d) {
                int nx = cx + kDx[d], ny = cy + kDy[d];
                if (!level.in_bounds(nx, ny) || level.at(nx, ny) != Tile::Empty) continue;
                int idx = ny * w + nx;
                if (dist[idx] < 0) {
                    dist[idx] = dist[cur] + 1;
                    if (dist[idx] > best) best = dist[idx];
                    queue[tail++] = idx;
                }
            }
        }
    }
    return best;
}

FitnessReport evaluate_fitness(const Level& level) {
    FitnessReport report;
    report.regions = count_regions(level);
    report.longest_path = longest_shortest_path(level);
    if (report.regions == 1) {
        double f = 0.5 + 0.5 * (static_cast<double>(report.longest_path) / kPathNormalizer);
        report.fitness = f > 1.0 ? 1.0 : f;
    } else if (report.regions > 1 && report.regions < kRegionCap) {
        report.fitness = 0.5 * (1.0 - static_cast<double>(report.regions) / kRegionCap);
    } else {
        report.fitness = 0.0;
    }
    return report;
}

void apply_action_in_place(Level& level, int x, int y, MutationAction action) {
    if (!level.in_bounds(x, y)) {
        throw std::invalid_argument("mutation location out of bounds");
    }
    switch (action) {
        case MutationAction::NoChange:
            break;
        case MutationAction::ChangeToEmpty:
            level.set(x, y, Tile::Empty);
            break;
        case MutationAction::ChangeToSolid:
            level.set(x, y, Tile::Solid);
            break;
    }
}

Level apply_action(const Level& level, int x, int y, MutationAction action) {
    Level next = level;
    apply_action_in_place(next, x, y, action);
    return next;
}

void save_level(const Level& level, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << level.to_text();
    if (!out) throw std::runtime_error("failed writing " + path);
}

Level load_level(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return Level::from_text(buf.str());
}

}  // namespace mm
