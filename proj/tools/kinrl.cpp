#include <CLI11.hpp>

#include <iostream>

#include "kinrl/cli/commands.hpp"
#include "kinrl/cli/config.hpp"

namespace {

constexpr int exit_usage = 2;

int execute(kinrl::cli::Command command, const std::string& config_path, const std::vector<std::string>& extras) {
    using namespace kinrl::cli;
    std::optional<std::filesystem::path> file;
    if (!config_path.empty()) file = config_path;
    LoadedConfig config;
    try {
        config = load_config(command, file, parse_overrides(extras));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    try {
        return run_command(config, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using kinrl::cli::Command;
    CLI::App app{"Kin-aware reinforcement learning experiments"};
    app.set_version_flag("--version", std::string(kinrl::cli::tool_version));
    app.require_subcommand(1);
    app.footer(
        "Any config key can be overridden with --key=value, e.g. --learner.alpha=0.5 or --seeds=1,2,3.\n"
        "Exit codes: 0 success, 1 runtime failure or failed check, 2 invalid configuration or usage.");

    std::string config_path;
    struct Sub {
        Command command;
        const char* description;
    };
    const Sub subs[] = {
        {Command::discrimination, "Kin discrimination sweep over c/b and genetic similarity"},
        {Command::dispersal, "Dispersal sweep over community mixing eta and b/c"},
        {Command::sandbox, "Birth-death sandbox with population rewards"},
    };
    std::vector<std::pair<CLI::App*, Command>> runners;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(kinrl::cli::to_string(s.command), s.description);
        sub->add_option("config", config_path, "YAML config file (defaults apply when omitted)");
        sub->allow_extras();
        runners.emplace_back(sub, s.command);
    }
    CLI::App* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("config", config_path, "YAML config file")->required();
    validate->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    for (const auto& [sub, command] : runners)
        if (sub->parsed()) return execute(command, config_path, sub->remaining());

    try {
        const Command command = kinrl::cli::detect_command(config_path);
        const auto config =
            kinrl::cli::load_config(command, config_path, kinrl::cli::parse_overrides(validate->remaining()));
        std::cout << config_path << ": ok (" << kinrl::cli::to_string(command) << ")\n";
        return 0;
    } catch (const kinrl::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
}
