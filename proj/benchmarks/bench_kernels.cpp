// Times the data-parallel kernels in serial reference mode vs OpenMP mode
// and verifies that both produce identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>

#include "mm/dataset.hpp"
#include "mm/evolution.hpp"
#include "mm/exec.hpp"
#include "mm/inference.hpp"
#include "mm/metrics.hpp"
#include "mm/policy.hpp"

using namespace mm;

namespace {

double seconds(std::function<void()> fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-24s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name,
                serial_s, parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0,
                identical ? "results identical" : "RESULTS DIFFER");
}

TrainingDataset synthetic_dataset(std::size_t n, std::uint64_t seed) {
    TrainingDataset ds;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const Level level = new_random_level(kLevelSize, kLevelSize, 0.5, rng);
        const int x = static_cast<int>(rng.uniform_index(kLevelSize));
        const int y = static_cast<int>(rng.uniform_index(kLevelSize));
        ds.examples.push_back({encode_observation(level, x, y),
                               static_cast<MutationAction>(rng.uniform_index(kNumActions))});
    }
    return ds;
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());

    // batch gradients
    {
        const TrainingDataset ds = synthetic_dataset(256, 7);
        const PolicyWeights weights = init_network(3);
        std::vector<std::size_t> idx(ds.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::vector<double> g_serial, g_parallel;
        const double ts = seconds([&] {
            compute_batch_gradients(weights, ds, idx, g_serial, ExecMode::Serial);
        });
        const double tp = seconds([&] {
            compute_batch_gradients(weights, ds, idx, g_parallel, ExecMode::Parallel);
        });
        report("batch gradients", ts, tp, g_serial == g_parallel);
    }

    // offspring generation + fitness evaluation
    {
        EvolutionConfig config;
        config.mu = config.lambda = 200;
        config.seed = 11;
        RandomActionSource source;
        double ts = 0, tp = 0;
        Population pop_s, pop_p;
        {
            Rng rng(config.seed);
            Population pop = init_population(config, rng, ExecMode::Serial);
            std::uint64_t next = pop.size();
            ts = seconds([&] {
                for (int g = 0; g < 50; ++g) {
                    pop = step_generation(pop, config, source, rng, next, ExecMode::Serial);
                }
            });
            pop_s = pop;
        }
        {
            Rng rng(config.seed);
            Population pop = init_population(config, rng, ExecMode::Parallel);
            std::uint64_t next = pop.size();
            tp = seconds([&] {
                for (int g = 0; g < 50; ++g) {
                    pop = step_generation(pop, config, source, rng, next, ExecMode::Parallel);
                }
            });
            pop_p = pop;
        }
        bool same = pop_s.size() == pop_p.size();
        for (std::size_t i = 0; same && i < pop_s.size(); ++i) {
            same = pop_s[i].current_level == pop_p[i].current_level &&
                   pop_s[i].fitness == pop_p[i].fitness;
        }
        report("evolution step x50", ts, tp, same);
    }

    // batch episode generation
    {
        const PolicyWeights weights = init_network(5);
        std::vector<GenerationOutcome> out_s, out_p;
        InferenceConfig inf;
        inf.max_passes = 4;  // untrained model; cap the episodes
        const double ts =
            seconds([&] { out_s = batch_generate(weights, 16, 21, inf, ExecMode::Serial); });
        const double tp =
            seconds([&] { out_p = batch_generate(weights, 16, 21, inf, ExecMode::Parallel); });
        bool same = out_s.size() == out_p.size();
        for (std::size_t i = 0; same && i < out_s.size(); ++i) {
            same = out_s[i].final_level == out_p[i].final_level &&
                   out_s[i].success == out_p[i].success &&
                   out_s[i].iterations == out_p[i].iterations;
        }
        report("batch generation", ts, tp, same);
    }

    // pairwise history similarity
    {
        Rng rng(13);
        std::vector<std::vector<std::uint32_t>> sequences;
        for (int i = 0; i < 24; ++i) {
            std::vector<std::uint32_t> seq(1500);
            for (auto& t : seq) t = static_cast<std::uint32_t>(rng.uniform_index(588));
            sequences.push_back(std::move(seq));
        }
        double sim_s = 0, sim_p = 0;
        const double ts =
            seconds([&] { sim_s = mean_pairwise_similarity(sequences, ExecMode::Serial); });
        const double tp =
            seconds([&] { sim_p = mean_pairwise_similarity(sequences, ExecMode::Parallel); });
        report("pairwise similarity", ts, tp, sim_s == sim_p);
    }

    return 0;
}
