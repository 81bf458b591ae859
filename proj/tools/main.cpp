// Command-line front end: evolve | generate | analyze | bench | reproduce.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mm/config.hpp"
#include "mm/exec.hpp"
#include "mm/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string scale = "full";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
};

mm::ExperimentConfig load_config(const CommonFlags& flags) {
    mm::ExperimentConfig config;
    if (!flags.config_path.empty()) {
        config = mm::parse_experiment_config(flags.config_path);
    }
    if (flags.scale == "quick") {
        config.evolution.generations = 300;
        config.runs = 1;
        if (config.evolution.train_interval > config.evolution.generations) {
            config.evolution.train_interval = config.evolution.generations;
        }
    } else if (flags.scale != "full") {
        throw mm::ConfigError("--scale", 0, "must be 'quick' or 'full'");
    }
    if (flags.seed_given) {
        config.evolution.seed = flags.seed;
        config.training.seed = flags.seed;
    }
    return config;
}

mm::ExecMode exec_mode(const CommonFlags& flags) {
    if (flags.threads > 0) mm::set_max_threads(flags.threads);
    return flags.threads == 1 ? mm::ExecMode::Serial : mm::ExecMode::Parallel;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file");
    cmd->add_option("--out", flags.out_dir, "output root (default $MUTATION_MODELS_OUT or runs/)");
    cmd->add_option("--scale", flags.scale, "full (default) or quick (300 generations, 1 run)");
    cmd->add_option("--seed", flags.seed, "override the experiment seed")
        ->each([&flags](const std::string&) { flags.seed_given = true; });
    cmd->add_option("--threads", flags.threads, "worker threads (1 = serial reference path)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maze generation by imitating evolved mutation trajectories"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string weights_path;
    std::string mode_str;
    std::string analyze_dir;
    std::string reproduce_target;
    int episodes = 100;
    int epochs = 0;

    CLI::App* evolve = app.add_subcommand("evolve", "run the evolution loop and train models");
    add_common(evolve, flags);
    evolve->add_option("--mode", mode_str, "normal | assisted (overrides config)");
    evolve->add_option("--epochs", epochs, "training epochs per event (overrides config)");

    CLI::App* generate = app.add_subcommand("generate", "generate levels with a trained model");
    add_common(generate, flags);
    generate->add_option("--weights", weights_path, "trained weights file")->required();
    generate->add_option("-n,--levels", episodes, "number of levels to generate");

    CLI::App* analyze = app.add_subcommand("analyze", "recompute metrics for an outcomes directory");
    analyze->add_option("dir", analyze_dir, "directory containing outcomes.csv")->required();

    CLI::App* bench = app.add_subcommand("bench", "wall-clock comparison: model vs evolution");
    add_common(bench, flags);
    bench->add_option("--weights", weights_path, "trained weights file")->required();
    bench->add_option("-n,--episodes", episodes, "episodes / evolution runs per side");

    CLI::App* reproduce = app.add_subcommand("reproduce", "run a full experiment preset");
    add_common(reproduce, flags);
    reproduce->add_option("target", reproduce_target, "table1 | table2 | fig3")->required();
    reproduce->add_option("--weights", weights_path, "reuse trained weights (table2 only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*evolve) {
            mm::ExperimentConfig config = load_config(flags);
            if (!mode_str.empty()) {
                if (mode_str == "normal") {
                    config.mode = mm::EvolutionMode::Normal;
                } else if (mode_str == "assisted") {
                    config.mode = mm::EvolutionMode::Assisted;
                } else {
                    throw mm::ConfigError("--mode", 0, "must be 'normal' or 'assisted'");
                }
            }
            if (epochs > 0) {
                config.epochs = epochs;
                config.training.epochs = epochs;
            }
            const auto art = mm::cmd_evolve(config, flags.out_dir, exec_mode(flags));
            std::cout << "run directory: " << art.run_dir.string() << '\n';
        } else if (*generate) {
            const mm::ExperimentConfig config = load_config(flags);
            const std::uint64_t seed = flags.seed_given ? flags.seed : config.evolution.seed;
            const auto root = mm::resolve_output_root(flags.out_dir, config.output_dir);
            mm::cmd_generate(weights_path, episodes, seed, root / "generated",
                             config.inference_config(), exec_mode(flags));
        } else if (*analyze) {
            mm::cmd_analyze(analyze_dir);
        } else if (*bench) {
            const mm::ExperimentConfig config = load_config(flags);
            const std::uint64_t seed = flags.seed_given ? flags.seed : config.evolution.seed;
            const auto root = mm::resolve_output_root(flags.out_dir, config.output_dir);
            mm::cmd_bench(weights_path, episodes, seed, root / "bench", config.evolution);
        } else if (*reproduce) {
            const mm::ExperimentConfig config = load_config(flags);
            mm::ReproduceTarget target;
            if (reproduce_target == "table1") {
                target = mm::ReproduceTarget::Table1;
            } else if (reproduce_target == "table2") {
                target = mm::ReproduceTarget::Table2;
            } else if (reproduce_target == "fig3") {
                target = mm::ReproduceTarget::Fig3;
            } else {
                throw mm::ConfigError("reproduce", 0, "target must be table1, table2 or fig3");
            }
            mm::cmd_reproduce(target, config, flags.out_dir, weights_path, exec_mode(flags));
        }
    } catch (const mm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
