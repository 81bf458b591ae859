#include "mm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mm {

InferenceConfig ExperimentConfig::inference_config() const {
    InferenceConfig inf;
    inf.width = evolution.width;
    inf.height = evolution.height;
    inf.solid_probability = evolution.solid_probability;
    inf.max_passes = max_passes;
    inf.crop_size = evolution.crop_size;
    return inf;
}

void ExperimentConfig::validate() const {
    evolution.validate();
    training.validate();
    if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
    if (training.epochs != epochs) {
        throw std::invalid_argument("training epochs out of sync with the experiment value");
    }
    if (runs <= 0) throw std::invalid_argument("runs must be positive");
    if (inference_levels <= 0) throw std::invalid_argument("inference_levels must be positive");
    if (max_passes <= 0) throw std::invalid_argument("max_passes must be positive");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Parser {
    const std::string& file;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(file, line_no, what); }

    long long parse_int(const std::string& v) const {
        long long out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
            fail("expected an integer, got '" + v + "'");
        }
        return out;
    }

    double parse_real(const std::string& v) const {
        std::size_t used = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &used);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
        }
        if (used != v.size()) fail("expected a number, got '" + v + "'");
        return out;
    }

    std::uint64_t parse_u64(const std::string& v) const {
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
            fail("expected a non-negative integer, got '" + v + "'");
        }
        return out;
    }
};

}  // namespace

ExperimentConfig parse_experiment_config_text(const std::string& text, const std::string& name) {
    ExperimentConfig config;
    bool training_seed_given = false;

    Parser p{name};
    std::istringstream in(text);
    std::string raw;
    std::string section;
    while (std::getline(in, raw)) {
        ++p.line_no;
        std::string line = raw;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') p.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "evolution" && section != "training" &&
                section != "domain") {
                p.fail("unknown section [" + section + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) p.fail("missing key before '='");
        if (value.empty()) p.fail("missing value for '" + key + "'");
        if (section.empty()) p.fail("key '" + key + "' appears before any section");

        if (section == "experiment") {
            if (key == "mode") {
                if (value == "normal") {
                    config.mode = EvolutionMode::Normal;
                } else if (value == "assisted") {
                    config.mode = EvolutionMode::Assisted;
                } else {
                    p.fail("mode must be 'normal' or 'assisted'");
                }
            } else if (key == "epochs") {
                config.epochs = static_cast<int>(p.parse_int(value));
            } else if (key == "runs") {
                config.runs = static_cast<int>(p.parse_int(value));
            } else if (key == "inference_levels") {
                config.inference_levels = static_cast<int>(p.parse_int(value));
            } else if (key == "output_dir") {
                config.output_dir = value;
            } else {
                p.fail("unknown key '" + key + "' in [experiment]");
            }
        } else if (section == "evolution") {
            if (key == "mu") {
                config.evolution.mu = static_cast<int>(p.parse_int(value));
            } else if (key == "lambda") {
                config.evolution.lambda = static_cast<int>(p.parse_int(value));
            } else if (key == "generations") {
                config.evolution.generations = static_cast<int>(p.parse_int(value));
            } else if (key == "top_x") {
                config.evolution.top_x = static_cast<int>(p.parse_int(value));
            } else if (key == "train_interval") {
                config.evolution.train_interval = static_cast<int>(p.parse_int(value));
            } else if (key == "random_action_chance") {
                config.evolution.random_action_chance = p.parse_real(value);
            } else if (key == "seed") {
                config.evolution.seed = p.parse_u64(value);
            } else {
                p.fail("unknown key '" + key + "' in [evolution]");
            }
        } else if (section == "training") {
            if (key == "learning_rate") {
                config.training.learning_rate = p.parse_real(value);
            } else if (key == "batch_size") {
                config.training.batch_size = static_cast<int>(p.parse_int(value));
            } else if (key == "seed") {
                config.training.seed = p.parse_u64(value);
                training_seed_given = true;
            } else {
                p.fail("unknown key '" + key + "' in [training]");
            }
        } else {  // domain
            if (key == "width") {
                config.evolution.width = static_cast<int>(p.parse_int(value));
            } else if (key == "height") {
                config.evolution.height = static_cast<int>(p.parse_int(value));
            } else if (key == "solid_probability") {
                config.evolution.solid_probability = p.parse_real(value);
            } else if (key == "crop_size") {
                config.evolution.crop_size = static_cast<int>(p.parse_int(value));
            } else if (key == "max_passes") {
                config.max_passes = static_cast<int>(p.parse_int(value));
            } else {
                p.fail("unknown key '" + key + "' in [domain]");
            }
        }
    }

    config.training.epochs = config.epochs;
    if (!training_seed_given) config.training.seed = config.evolution.seed;
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(name, p.line_no, e.what());
    }
    return config;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config_text(buf.str(), path);
}

std::string default_config_text() {
    return
        "# mutation-models experiment configuration\n"
        "\n"
        "[experiment]\n"
        "mode = normal              # normal | assisted\n"
        "epochs = 2                 # training epochs per event (2, 4 or 8 in the presets)\n"
        "runs = 3                   # repetitions for the reproduce presets\n"
        "inference_levels = 100     # levels generated per trained model\n"
        "# output_dir = runs        # defaults to $MUTATION_MODELS_OUT or 'runs'\n"
        "\n"
        "[evolution]\n"
        "mu = 50\n"
        "lambda = 50\n"
        "generations = 2000\n"
        "top_x = 10                 # chromosomes feeding the training dataset\n"
        "train_interval = 100       # assisted mode: retrain every I generations\n"
        "random_action_chance = 0.25\n"
        "seed = 1\n"
        "\n"
        "[training]\n"
        "learning_rate = 1e-4\n"
        "batch_size = 32\n"
        "# seed = 1                 # defaults to the evolution seed\n"
        "\n"
        "[domain]\n"
        "width = 14\n"
        "height = 14\n"
        "solid_probability = 0.5    # noise density of fresh levels\n"
        "crop_size = 8              # observation window edge length\n"
        "max_passes = 196           # scanline passes before giving up\n";
}

}  // namespace mm
