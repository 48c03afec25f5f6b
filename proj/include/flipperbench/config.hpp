#pragma once

// Declarative configuration: one TOML file describing the arena, robot,
// policies, controller, episodes and bridge. Every section is optional and
// unknown keys are rejected so typos surface as ConfigError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipperbench/arena.hpp"
#include "flipperbench/command.hpp"
#include "flipperbench/episode.hpp"
#include "flipperbench/geometry.hpp"
#include "flipperbench/logstore.hpp"
#include "flipperbench/metrics.hpp"
#include "flipperbench/policies.hpp"
#include "flipperbench/sim.hpp"

namespace flipperbench {

enum class PassMode { kFull, kPerSector };

struct BridgeConfig {
  std::string host = "127.0.0.1";
  int port = 8765;
  double time_scale = 1.0;  // sim seconds per wall second
  double state_rate = 30.0; // Hz
  std::string method = "mfc-continuous";  // default for start messages without one
};

struct BenchConfig {
  ArenaSpec arena = default_arena();
  RobotGeometry geometry;
  PolicyConfig policy;
  MappingConfig mapping;
  ControllerLayout layout = ControllerLayout::gamepad();
  SimOptions sim;
  EpisodeConfig episode;  // method, targets and seed are filled per run
  ScriptedOperator::Options scripted;
  PassMode passes = PassMode::kFull;
  std::vector<std::string> methods = registered_policies();
  BridgeConfig bridge;
  ScoringOptions scoring;
  std::uint64_t seed = 0;

  // Cross-section checks; throws ConfigError.
  void validate() const;
  SimContext context() const;
};

// `origin` names the text in error messages.
BenchConfig parse_config(std::string_view text, std::string_view origin = "config");
BenchConfig load_config(const std::filesystem::path& path);

// --config when given, else $FLIPPERBENCH_CONFIG, else nothing (built-in defaults).
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag);

// Arena alone, either at the top level of the file or under [arena].
ArenaSpec parse_arena(std::string_view text, std::string_view origin = "arena");
ArenaSpec load_arena(const std::filesystem::path& path);
// Writes every field so the result loads back to an identical arena.
std::string arena_to_toml(const ArenaSpec& arena);

CalibrationTable parse_calibration(std::string_view text, std::string_view origin = "calibration");
CalibrationTable load_calibration(const std::filesystem::path& path);
std::string calibration_to_toml(const CalibrationTable& table);

ImportMapping parse_import_mapping(std::string_view text, std::string_view origin = "mapping");
ImportMapping load_import_mapping(const std::filesystem::path& path);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace flipperbench
