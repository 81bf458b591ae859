#include "mm/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mm/evolution.hpp"

namespace mm {

TrainingDataset extract_dataset(std::span<const Chromosome> top, std::string run_id,
                                int generation, int crop_size) {
    TrainingDataset dataset;
    dataset.run_id = std::move(run_id);
    dataset.generation = generation;
    std::size_t total = 0;
    for (const Chromosome& c : top) total += c.history.size();
    dataset.examples.reserve(total);

    for (const Chromosome& c : top) {
        Level level = c.initial_level;
        for (std::size_t k = 0; k < c.history.size(); ++k) {
            const MutationRecord& r = c.history[k];
            if (!level.in_bounds(r.x, r.y)) {
                throw std::runtime_error("corrupt history in chromosome " +
                                         std::to_string(c.creation_index) + ": record " +
                                         std::to_string(k) + " is out of bounds");
            }
            dataset.examples.push_back(
                {encode_observation(level, r.x, r.y, crop_size), r.action});
            apply_action_in_place(level, r.x, r.y, r.action);
        }
    }
    return dataset;
}

void save_dataset(const TrainingDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "mmds v1 run=" << dataset.run_id << " gen=" << dataset.generation << "\n";
    std::string line;
    for (const TrainingExample& ex : dataset.examples) {
        line.clear();
        for (float cell : ex.observation.cells) line.push_back(cell != 0.0f ? '1' : '0');
        line.push_back(' ');
        line.push_back(static_cast<char>('0' + static_cast<int>(ex.action)));
        line.push_back('\n');
        out << line;
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

TrainingDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    TrainingDataset dataset;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        // header layout: mmds v1 run=<id> gen=<g>
        std::istringstream header(line);
        std::string magic, version, run_field, gen_field;
        header >> magic >> version >> run_field >> gen_field;
        if (magic != "mmds") parse_fail(path, 1, "not a dataset file");
        if (version != "v1") parse_fail(path, 1, "unsupported dataset version '" + version + "'");
        if (run_field.rfind("run=", 0) != 0 || gen_field.rfind("gen=", 0) != 0) {
            parse_fail(path, 1, "malformed header fields");
        }
        dataset.run_id = run_field.substr(4);
        try {
            dataset.generation = std::stoi(gen_field.substr(4));
        } catch (const std::exception&) {
            parse_fail(path, 1, "generation field is not a number");
        }
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t sep = line.find(' ');
        if (sep == std::string::npos || sep + 2 != line.size()) {
            parse_fail(path, line_no, "expected '<cells> <action>'");
        }
        const std::size_t cell_count = sep;
        const int size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cell_count))));
        if (static_cast<std::size_t>(size) * size != cell_count) {
            parse_fail(path, line_no, "observation is not square");
        }
        TrainingExample ex;
        ex.observation.size = size;
        ex.observation.cells.reserve(cell_count);
        for (std::size_t i = 0; i < cell_count; ++i) {
            if (line[i] == '1') {
                ex.observation.cells.push_back(1.0f);
            } else if (line[i] == '0') {
                ex.observation.cells.push_back(0.0f);
            } else {
                parse_fail(path, line_no, "observation cells must be '0' or '1'");
            }
        }
        const char a = line[sep + 1];
        if (a < '0' || a >= '0' + kNumActions) {
            parse_fail(path, line_no, "action digit out of range");
        }
        ex.action = static_cast<MutationAction>(a - '0');
        dataset.examples.push_back(std::move(ex));
    }
    return dataset;
}

std::array<std::size_t, kNumActions> action_class_counts(const TrainingDataset& dataset) {
    std::array<std::size_t, kNumActions> counts{};
    for (const TrainingExample& ex : dataset.examples) {
        counts[static_cast<int>(ex.action)] += 1;
    }
    return counts;
}

}  // namespace mm
