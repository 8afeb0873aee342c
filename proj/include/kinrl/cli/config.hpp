#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinrl/experiments.hpp"
#include "kinrl/popreward.hpp"

namespace kinrl::cli {

// Invalid configuration. The message is already prefixed with the location,
// e.g. "runs.yaml:12: learner.alpha: must lie in (0, 1]".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { discrimination, dispersal, sandbox };

std::string to_string(Command command);

struct PolicySpec {
    std::string kind = "random";  // idle | always | random | threshold | qlearning
    double probability = 0.1;
    double threshold = 5.0;
    RewardKind reward = RewardKind::combined;
    LearnerConfig learner{};
};

std::unique_ptr<ReproductionPolicy> make_policy(const PolicySpec& spec);

struct SandboxRun {
    SandboxConfig sandbox{};
    PolicySpec policy{};
    std::uint64_t seed = 1;
};

struct OutputSpec {
    std::filesystem::path dir;
    bool svg = true;
};

struct LoadedConfig {
    Command command = Command::discrimination;
    ExperimentConfig experiment{};  // discrimination and dispersal
    SandboxRun sandbox{};           // sandbox
    OutputSpec output{};
    std::size_t threads = 1;
    std::string canonical;  // sorted-key JSON of the resolved settings
};

// A "--key=value" override, key in dotted form ("learner.alpha").
struct Override {
    std::string key;
    std::string value;
};

// Parses "--key=value" strings; throws ConfigError on anything else.
std::vector<Override> parse_overrides(const std::vector<std::string>& args);

// Reads the YAML file (when given), applies overrides, validates, and checks
// feasibility of every sweep point. The `experiment` key, when present, must
// agree with `command`.
LoadedConfig load_config(Command command, const std::optional<std::filesystem::path>& file,
                         const std::vector<Override>& overrides);

// Default output directory: $KINRL_OUTPUT_DIR or ./kinrl-out, plus the command name.
std::filesystem::path default_output_dir(Command command);

}  // namespace kinrl::cli
