#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tossing/domain.hpp"
#include "tossing/flight.hpp"

namespace tossing {

/// Writes env_000.txt, env_001.txt, ... in workspace format plus index.csv
/// (`file,walls,occupied,patterns`). Returns every path written.
std::vector<std::filesystem::path> export_environments(const std::vector<Workspace>& envs,
                                                       const std::filesystem::path& dir);

/// `time,x,y,z,roll,yaw`; positions in the toss frame, angles in degrees.
std::string trajectory_csv(const std::vector<TrajectorySample>& trace);

/// Whitespace-separated columns under a `#` header line, for gnuplot.
std::string gnuplot_columns(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns);

}  // namespace tossing
