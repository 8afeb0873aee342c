#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kinrl/cli/config.hpp"

namespace kinrl::cli {

inline constexpr std::string_view tool_version = "0.1.0";

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// "c_over_b,h,coop_freq_mean,coop_freq_se,n_seeds"
void write_discrimination_csv(std::ostream& out, std::span<const AggregateRow> rows);
// "eta,b_over_c,inclusive,coop_prop_mean,coop_prop_se,n_seeds"
void write_dispersal_csv(std::ostream& out, std::span<const AggregateRow> rows);

// Per-run metadata, deterministic for a given config.
std::string run_metadata_json(const LoadedConfig& config, std::span<const RunResult> results);

// Writes through a temporary file and renames it into place.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

// Standalone SVG line charts of the aggregated tables.
std::string discrimination_svg(std::span<const AggregateRow> rows);
std::string dispersal_svg(std::span<const AggregateRow> rows);

// Reads the `experiment` key of a config file; throws ConfigError when absent.
Command detect_command(const std::filesystem::path& file);

// Runs a loaded configuration, writing outputs and manifest.json under
// config.output.dir. Returns the process exit code (0 ok, 1 failed check).
int run_command(const LoadedConfig& config, std::ostream& log);

}  // namespace kinrl::cli
