#include "tossing/io.hpp"

#include <fmt/format.h>

#include "tossing/config.hpp"
#include "tossing/environments.hpp"
#include "tossing/errors.hpp"

namespace tossing {

std::vector<std::filesystem::path> export_environments(const std::vector<Workspace>& envs,
                                                       const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  std::string index = "file,walls,occupied,patterns\n";
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const std::string name = fmt::format("env_{:03d}.txt", i);
    const auto path = dir / name;
    write_text_file(path, workspace_text(envs[i]));
    written.push_back(path);

    int occupied = 0;
    for (bool b : envs[i].occupancy()) occupied += b ? 1 : 0;
    std::string patterns;
    for (const auto& cp : pattern_signature(envs[i])) {
      if (!patterns.empty()) patterns += ' ';
      patterns += cp.label();
    }
    // Wall lists contain commas, so the field is quoted.
    index += fmt::format("{},\"{}\",{},{}\n", name, envs[i].walls().to_string(), occupied, patterns);
  }
  const auto index_path = dir / "index.csv";
  write_text_file(index_path, index);
  written.push_back(index_path);
  return written;
}

std::string trajectory_csv(const std::vector<TrajectorySample>& trace) {
  std::string out = "time,x,y,z,roll,yaw\n";
  for (const auto& s : trace) {
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.time, s.position.x(),
                       s.position.y(), s.position.z(), s.roll_deg, s.yaw_deg);
  }
  return out;
}

std::string gnuplot_columns(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size() || columns.empty()) {
    throw InvalidInput("need one name per column");
  }
  for (const auto& c : columns) {
    if (c.size() != columns.front().size()) throw InvalidInput("column lengths differ");
  }
  std::string out = "#";
  for (const auto& n : names) out += " " + n;
  out += "\n";
  for (std::size_t i = 0; i < columns.front().size(); ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) out += ' ';
      out += fmt::format("{:.6f}", columns[c][i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace tossing
