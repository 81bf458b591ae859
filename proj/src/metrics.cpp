#include "mm/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

namespace mm {

BatchMetrics compute_batch_metrics(std::span<const GenerationOutcome> outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("outcome list is empty");

    BatchMetrics metrics;
    metrics.total = static_cast<int>(outcomes.size());
    std::set<std::pair<int, int>> unique_pairs;
    double iter_sum = 0.0;
    for (const GenerationOutcome& o : outcomes) {
        if (!o.success) continue;
        ++metrics.successes;
        unique_pairs.insert({o.path_length, o.empty_tiles});
        iter_sum += o.iterations;
    }
    metrics.success_rate = 100.0 * metrics.successes / metrics.total;
    if (metrics.successes > 0) {
        metrics.diversity = 100.0 * static_cast<double>(unique_pairs.size()) / metrics.successes;
        const double mean = iter_sum / metrics.successes;
        metrics.mean_iterations = mean;
        double sq = 0.0;
        for (const GenerationOutcome& o : outcomes) {
            if (o.success) sq += (o.iterations - mean) * (o.iterations - mean);
        }
        metrics.iteration_std =
            metrics.successes > 1 ? std::sqrt(sq / (metrics.successes - 1)) : 0.0;
    }
    return metrics;
}

namespace {

// difflib-style longest-match search over a window, tracking match lengths
// ending at every position of b. Ties resolve to the earliest position in a,
// then in b, which the ascending scan yields with a strict comparison.
struct MatchFinder {
    std::span<const std::uint32_t> a, b;
    std::unordered_map<std::uint32_t, std::vector<int>> b2j;
    std::vector<int> j2len, newj2len;
    std::vector<int> touched, touched_new;

    MatchFinder(std::span<const std::uint32_t> a_, std::span<const std::uint32_t> b_)
        : a(a_), b(b_), j2len(b_.size(), 0), newj2len(b_.size(), 0) {
        for (int j = 0; j < static_cast<int>(b.size()); ++j) {
            b2j[b[j]].push_back(j);
        }
    }

    struct Match {
        int i = 0, j = 0, size = 0;
    };

    Match find(int alo, int ahi, int blo, int bhi) {
        Match best{alo, blo, 0};
        for (int j : touched) j2len[j] = 0;
        touched.clear();
        for (int i = alo; i < ahi; ++i) {
            const auto it = b2j.find(a[i]);
            if (it != b2j.end()) {
                for (int j : it->second) {
                    if (j < blo) continue;
                    if (j >= bhi) break;
                    const int k = (j > blo && j2len[j - 1] > 0) ? j2len[j - 1] + 1 : 1;
                    newj2len[j] = k;
                    touched_new.push_back(j);
                    if (k > best.size) {
                        best = {i - k + 1, j - k + 1, k};
                    }
                }
            }
            for (int j : touched) j2len[j] = 0;
            std::swap(j2len, newj2len);
            std::swap(touched, touched_new);
            touched_new.clear();
        }
        return best;
    }
};

}  // namespace

double ratcliff_obershelp(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    const std::size_t denom = a.size() + b.size();
    if (denom == 0) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    MatchFinder finder(a, b);
    std::size_t matched = 0;
    std::vector<std::array<int, 4>> work;
    work.push_back({0, static_cast<int>(a.size()), 0, static_cast<int>(b.size())});
    while (!work.empty()) {
        const auto [alo, ahi, blo, bhi] = work.back();
        work.pop_back();
        if (alo >= ahi || blo >= bhi) continue;
        const auto m = finder.find(alo, ahi, blo, bhi);
        if (m.size == 0) continue;
        matched += static_cast<std::size_t>(m.size);
        work.push_back({alo, m.i, blo, m.j});
        work.push_back({m.i + m.size, ahi, m.j + m.size, bhi});
    }
    return 2.0 * static_cast<double>(matched) / static_cast<double>(denom);
}

std::vector<std::uint32_t> history_tokens(const Chromosome& chromosome) {
    std::vector<std::uint32_t> tokens;
    tokens.reserve(chromosome.history.size());
    for (const MutationRecord& r : chromosome.history) {
        tokens.push_back(static_cast<std::uint32_t>(r.x) |
                         (static_cast<std::uint32_t>(r.y) << 8) |
                         (static_cast<std::uint32_t>(r.action) << 16));
    }
    return tokens;
}

double mean_pairwise_similarity(const std::vector<std::vector<std::uint32_t>>& sequences,
                                ExecMode mode) {
    const std::size_t k = sequences.size();
    if (k < 2) throw std::invalid_argument("pairwise similarity needs at least two sequences");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
    }
    std::vector<double> sims(pairs.size());
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::Parallel)
#endif
    for (std::ptrdiff_t p = 0; p < n; ++p) {
        sims[p] = ratcliff_obershelp(sequences[pairs[p].first], sequences[pairs[p].second]);
    }
    (void)mode;
    double sum = 0.0;
    for (double s : sims) sum += s;
    return sum / static_cast<double>(sims.size());
}

double history_similarity(std::span<const Chromosome> top, ExecMode mode) {
    if (top.size() < 2) throw std::invalid_argument("history similarity needs >= 2 chromosomes");
    std::vector<std::vector<std::uint32_t>> tokens;
    tokens.reserve(top.size());
    for (const Chromosome& c : top) tokens.push_back(history_tokens(c));
    return mean_pairwise_similarity(tokens, mode);
}

ExpressiveRange expressive_range(std::span<const GenerationOutcome> outcomes, int width,
                                 int height) {
    ExpressiveRange era;
    era.empty_tile_max = width * height;
    era.path_max = width * height - 1;
    era.grid.assign(static_cast<std::size_t>(era.empty_bins()) * era.path_bins(), 0);
    for (const GenerationOutcome& o : outcomes) {
        if (!o.success) continue;
        era.points.emplace_back(o.empty_tiles, o.path_length);
        const int eb = o.empty_tiles / era.bin_width;
        const int pb = o.path_length / era.bin_width;
        era.grid[static_cast<std::size_t>(eb) * era.path_bins() + pb] += 1;
    }
    return era;
}

void emit_era_csv(const ExpressiveRange& era, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "empty_tiles,path_length\n";
    for (const auto& [empty_tiles, path_length] : era.points) {
        out << empty_tiles << ',' << path_length << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void emit_era_svg(const ExpressiveRange& era, const std::string& path) {
    const int cell = 8;
    const int margin_left = 50, margin_bottom = 40, margin_top = 30, margin_right = 15;
    const int plot_w = era.empty_bins() * cell;
    const int plot_h = era.path_bins() * cell;
    const int w = margin_left + plot_w + margin_right;
    const int h = margin_top + plot_h + margin_bottom;

    int max_count = 1;
    for (int c : era.grid) max_count = std::max(max_count, c);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << margin_left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
        << "Expressive range (" << era.points.size() << " levels)</text>\n";

    // y axis runs upward: path bin 0 at the bottom
    for (int eb = 0; eb < era.empty_bins(); ++eb) {
        for (int pb = 0; pb < era.path_bins(); ++pb) {
            const int count = era.cell(eb, pb);
            if (count == 0) continue;
            const double t = static_cast<double>(count) / max_count;
            const int red = static_cast<int>(255 * (1.0 - t));
            const int green = static_cast<int>(255 * (1.0 - 0.6 * t));
            const int x = margin_left + eb * cell;
            const int y = margin_top + (era.path_bins() - 1 - pb) * cell;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
                << cell << "\" fill=\"rgb(" << red << ',' << green << ",255)\"/>\n";
        }
    }
    out << "<rect x=\"" << margin_left << "\" y=\"" << margin_top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\"" << h - 12
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">empty tiles (0-"
        << era.empty_tile_max << ")</text>\n";
    out << "<text x=\"14\" y=\"" << margin_top + plot_h / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 14 " << margin_top + plot_h / 2 << ")\">longest path (0-"
        << era.path_max << ")</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

bool any_connected(const Population& population) {
    return std::any_of(population.begin(), population.end(),
                       [](const Chromosome& c) { return c.fitness.regions == 1; });
}

}  // namespace

WalltimeReport benchmark_walltime(const PolicyWeights& weights, int n,
                                  const EvolutionConfig& evolution_config, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("benchmark episode count must be positive");
    evolution_config.validate();

    using Clock = std::chrono::steady_clock;
    WalltimeReport report;
    report.episodes = n;
    report.evolution_runs = n;

    InferenceConfig inf;
    inf.width = evolution_config.width;
    inf.height = evolution_config.height;
    inf.solid_probability = evolution_config.solid_probability;
    inf.max_passes = evolution_config.width * evolution_config.height;
    inf.crop_size = evolution_config.crop_size;

    std::vector<double> inference_times, success_times;
    inference_times.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(i));
        const GenerationOutcome outcome = generate_level(weights, rng, inf);
        const double secs = outcome.wall_time_ms / 1000.0;
        inference_times.push_back(secs);
        if (outcome.success) {
            ++report.inference_successes;
            success_times.push_back(secs);
        }
    }

    std::vector<double> evolution_times;
    evolution_times.reserve(n);
    double generation_sum = 0.0;
    RandomActionSource random_source;
    for (int r = 0; r < n; ++r) {
        EvolutionConfig config = evolution_config;
        config.seed = mix_seed(seed, 0x10000u + static_cast<std::uint64_t>(r));
        const auto t0 = Clock::now();
        Rng rng(config.seed);
        Population population = init_population(config, rng, ExecMode::Serial);
        std::uint64_t next_index = population.size();
        int generation = 0;
        bool reached = any_connected(population);
        while (!reached && generation < config.generations) {
            population = step_generation(population, config, random_source, rng, next_index,
                                         ExecMode::Serial);
            ++generation;
            reached = any_connected(population);
        }
        evolution_times.push_back(
            std::chrono::duration<double>(Clock::now() - t0).count());
        generation_sum += generation;
        if (reached) ++report.evolution_reached;
    }

    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    report.inference_mean_s = mean(inference_times);
    report.inference_success_mean_s = mean(success_times);
    report.inference_std_s = sample_std(inference_times, report.inference_mean_s);
    report.evolution_mean_s = mean(evolution_times);
    report.evolution_std_s = sample_std(evolution_times, report.evolution_mean_s);
    report.evolution_mean_generations = generation_sum / n;
    report.speedup = report.inference_success_mean_s > 0.0
                         ? report.evolution_mean_s / report.inference_success_mean_s
                         : 0.0;
    return report;
}

void emit_benchmark_csv(const WalltimeReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "side,runs,successes,mean_s,std_s,mean_generations\n";
    out << "network," << report.episodes << ',' << report.inference_successes << ','
        << report.inference_mean_s << ',' << report.inference_std_s << ",\n";
    out << "evolution," << report.evolution_runs << ',' << report.evolution_reached << ','
        << report.evolution_mean_s << ',' << report.evolution_std_s << ','
        << report.evolution_mean_generations << '\n';
    out << "# speedup (evolution mean / network success mean): " << report.speedup << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace mm
