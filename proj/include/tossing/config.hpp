#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tossing/domain.hpp"
#include "tossing/flight.hpp"
#include "tossing/learner.hpp"
#include "tossing/reward.hpp"

namespace tossing {

struct PolicyConfig {
  int env_count = 48;
  double c5f3m2 = 0.60;
  std::string table = "builtin";  // builtin, simulated, or a CSV path
  int trials = 20;                 // tosses per pattern when simulating the table
  int jobs = 1;
  std::string checkpoint;          // used by the simulated table
  std::string object;              // object id for the simulated table; first trained if empty
  TaskTimes times;
};

struct AppConfig {
  std::uint64_t seed = 0;
  Workspace workspace;
  std::vector<BoxObject> catalog;
  RewardConfig reward;
  TrainConfig train;
  TossSetup setup;
  PolicyConfig policy;
  std::string train_object;  // empty: every trained object
  std::string output_dir = "out";

  AppConfig();
};

/// Largest upright footprint side among trained objects plus `gap`.
double default_cell_pitch(const std::vector<BoxObject>& catalog, double gap);

/// 4x5 grid, all four walls, empty, pitch from the default catalog.
Workspace default_workspace();

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string source;
  int line = 0;
};

/// `key = value` lines; `#` starts a comment. Throws ConfigError on lines
/// without `=`.
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source);

/// Entries from TOSSCTL_* variables: TOSSCTL_TRAIN__EPISODES=5 sets
/// train.episodes. `env` is a null-terminated array like `environ`.
std::vector<ConfigEntry> environment_entries(char** env);

/// Layers, lowest precedence first. Later layers override single-valued
/// keys; for `row` and `object` the highest layer that has any entries
/// supplies the whole list.
AppConfig build_config(const std::vector<std::vector<ConfigEntry>>& layers);

/// Defaults, then the file (if any), then the environment, then `overrides`.
/// A missing file raises ConfigError("file not found").
AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      char** env = nullptr);

/// Every key with its effective value, loadable by build_config.
std::string config_text(const AppConfig& cfg);

/// Grid keys, walls and one `row` line per grid row.
std::string workspace_text(const Workspace& ws);

/// Loads only the grid part of a config file.
Workspace load_workspace(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace tossing
