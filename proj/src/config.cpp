#include "tossing/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tossing/errors.hpp"

namespace tossing {

namespace {

constexpr double kDeg = M_PI / 180.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (in >> item) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidInput(fmt::format("'{}' is not a number", s));
  }
  return v;
}

template <typename Int>
Int to_integer(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidInput(fmt::format("'{}' is not an integer", s));
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidInput(fmt::format("'{}' is not a boolean", s));
}

WallSet to_walls(const std::string& s) {
  WallSet walls;
  if (s == "none" || s.empty()) return walls;
  for (const auto& name : split(s, ',')) {
    const auto side = side_from_string(name);
    if (!side) throw InvalidInput(fmt::format("unknown wall side '{}'", name));
    walls = walls.with(*side);
  }
  return walls;
}

// "min,max,count" with angles in degrees when `degrees` is set.
ActionDimension to_dimension(const std::string& s, bool degrees) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw InvalidInput("expected min,max,count");
  const double scale = degrees ? kDeg : 1.0;
  ActionDimension d{to_double(parts[0]) * scale, to_double(parts[1]) * scale,
                    to_integer<int>(parts[2])};
  if (d.count < 1) throw InvalidInput("count must be positive");
  if (!(d.min <= d.max)) throw InvalidInput("min must not exceed max");
  return d;
}

BoxObject to_object(const std::string& s) {
  const auto parts = split_ws(s);
  if (parts.size() < 4 || parts.size() > 6) {
    throw InvalidInput("expected: id width depth height [category] [trained|untrained]");
  }
  BoxObject o;
  o.id = parts[0];
  o.width = to_double(parts[1]);
  o.depth = to_double(parts[2]);
  o.height = to_double(parts[3]);
  if (parts.size() >= 5) o.category = parts[4];
  if (parts.size() == 6) {
    if (parts[5] == "trained") {
      o.trained = true;
    } else if (parts[5] != "untrained") {
      throw InvalidInput(fmt::format("expected trained or untrained, got '{}'", parts[5]));
    }
  }
  o.validate();
  return o;
}

// Grid fields are collected first and turned into a Workspace at the end,
// since the default pitch depends on the catalog.
struct Pending {
  AppConfig cfg;
  int rows = 4;
  int cols = 5;
  std::optional<double> cell_pitch;
  double gap = 0.01;
  double floor_height = 0.0;
  WallSet walls = WallSet::all();
};

using Setter = std::function<void(Pending&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["seed"] = [](Pending& p, const std::string& v) { p.cfg.seed = to_integer<std::uint64_t>(v); };
    t["output_dir"] = [](Pending& p, const std::string& v) { p.cfg.output_dir = v; };

    t["grid.rows"] = [](Pending& p, const std::string& v) { p.rows = to_integer<int>(v); };
    t["grid.cols"] = [](Pending& p, const std::string& v) { p.cols = to_integer<int>(v); };
    t["grid.cell_pitch"] = [](Pending& p, const std::string& v) { p.cell_pitch = to_double(v); };
    t["grid.gap"] = [](Pending& p, const std::string& v) { p.gap = to_double(v); };
    t["grid.floor_height"] = [](Pending& p, const std::string& v) { p.floor_height = to_double(v); };
    t["walls"] = [](Pending& p, const std::string& v) { p.walls = to_walls(v); };

    auto& r = t;
    r["reward.alpha"] = [](Pending& p, const std::string& v) { p.cfg.reward.alpha = to_double(v); };
    r["reward.beta"] = [](Pending& p, const std::string& v) { p.cfg.reward.beta = to_double(v); };
    r["reward.theta_bar_roll"] = [](Pending& p, const std::string& v) { p.cfg.reward.theta_bar_roll = to_double(v); };
    r["reward.theta_bar_yaw"] = [](Pending& p, const std::string& v) { p.cfg.reward.theta_bar_yaw = to_double(v); };
    r["reward.d_x_low"] = [](Pending& p, const std::string& v) { p.cfg.reward.d_x_low = to_double(v); };
    r["reward.d_y_low"] = [](Pending& p, const std::string& v) { p.cfg.reward.d_y_low = to_double(v); };
    r["reward.d_x_high"] = [](Pending& p, const std::string& v) { p.cfg.reward.d_x_high = to_double(v); };
    r["reward.d_y_high"] = [](Pending& p, const std::string& v) { p.cfg.reward.d_y_high = to_double(v); };
    r["reward.d_bar_z"] = [](Pending& p, const std::string& v) { p.cfg.reward.d_bar_z = to_double(v); };
    r["reward.invert_rz"] = [](Pending& p, const std::string& v) { p.cfg.reward.invert_rz = to_bool(v); };

    t["train.object"] = [](Pending& p, const std::string& v) { p.cfg.train_object = v; };
    t["train.episodes"] = [](Pending& p, const std::string& v) { p.cfg.train.episodes = to_integer<int>(v); };
    t["train.steps"] = [](Pending& p, const std::string& v) { p.cfg.train.steps_per_episode = to_integer<int>(v); };
    t["train.epsilon_start"] = [](Pending& p, const std::string& v) { p.cfg.train.epsilon_start = to_double(v); };
    t["train.epsilon_end"] = [](Pending& p, const std::string& v) { p.cfg.train.epsilon_end = to_double(v); };
    t["train.gamma"] = [](Pending& p, const std::string& v) { p.cfg.train.gamma = to_double(v); };
    t["train.learning_rate"] = [](Pending& p, const std::string& v) { p.cfg.train.learning_rate = to_double(v); };
    t["train.batch_size"] = [](Pending& p, const std::string& v) { p.cfg.train.batch_size = to_integer<int>(v); };
    t["train.warm_start_episodes"] = [](Pending& p, const std::string& v) { p.cfg.train.warm_start_episodes = to_integer<int>(v); };
    t["train.replay_capacity"] = [](Pending& p, const std::string& v) { p.cfg.train.replay_capacity = to_integer<int>(v); };
    t["train.hidden"] = [](Pending& p, const std::string& v) {
      std::vector<int> hidden;
      for (const auto& part : split(v, ',')) hidden.push_back(to_integer<int>(part));
      if (hidden.empty()) throw InvalidInput("need at least one hidden layer");
      p.cfg.train.hidden = hidden;
    };

    t["arm.shoulder_height"] = [](Pending& p, const std::string& v) { p.cfg.setup.arm.shoulder_height = to_double(v); };
    t["arm.link2"] = [](Pending& p, const std::string& v) { p.cfg.setup.arm.link_length[0] = to_double(v); };
    t["arm.link3"] = [](Pending& p, const std::string& v) { p.cfg.setup.arm.link_length[1] = to_double(v); };
    t["arm.link4"] = [](Pending& p, const std::string& v) { p.cfg.setup.arm.link_length[2] = to_double(v); };
    t["arm.release_stroke"] = [](Pending& p, const std::string& v) { p.cfg.setup.arm.release_stroke = to_double(v); };

    t["sim.time_step"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.time_step = to_double(v); };
    t["sim.gravity"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.gravity = to_double(v); };
    t["sim.standoff"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.standoff = to_double(v); };
    t["sim.wall_height"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.wall_height = to_double(v); };
    t["sim.wall_thickness"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.wall_thickness = to_double(v); };
    t["sim.max_flight_time"] = [](Pending& p, const std::string& v) { p.cfg.setup.sim.max_flight_time = to_double(v); };

    const std::array<std::pair<const char*, bool>, 6> dims = {{
        {"action.q2", true}, {"action.q3", true}, {"action.q4", true},
        {"action.w2", false}, {"action.w3", false}, {"action.w4", false},
    }};
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const bool degrees = dims[k].second;
      t[dims[k].first] = [k, degrees](Pending& p, const std::string& v) {
        p.cfg.setup.grid.dims[k] = to_dimension(v, degrees);
      };
    }

    t["policy.envs"] = [](Pending& p, const std::string& v) { p.cfg.policy.env_count = to_integer<int>(v); };
    t["policy.c5f3m2"] = [](Pending& p, const std::string& v) { p.cfg.policy.c5f3m2 = to_double(v); };
    t["policy.table"] = [](Pending& p, const std::string& v) { p.cfg.policy.table = v; };
    t["policy.trials"] = [](Pending& p, const std::string& v) { p.cfg.policy.trials = to_integer<int>(v); };
    t["policy.jobs"] = [](Pending& p, const std::string& v) { p.cfg.policy.jobs = to_integer<int>(v); };
    t["policy.checkpoint"] = [](Pending& p, const std::string& v) { p.cfg.policy.checkpoint = v; };
    t["policy.object"] = [](Pending& p, const std::string& v) { p.cfg.policy.object = v; };
    t["policy.time_pp"] = [](Pending& p, const std::string& v) { p.cfg.policy.times.pick_and_place = to_double(v); };
    t["policy.time_pt"] = [](Pending& p, const std::string& v) { p.cfg.policy.times.pick_and_toss = to_double(v); };
    return t;
  }();
  return table;
}

bool is_list_key(const std::string& key) { return key == "row" || key == "object"; }

ConfigError entry_error(const ConfigEntry& e, const std::string& message) {
  return ConfigError(e.source, e.line, e.key + ": " + message);
}

std::vector<bool> parse_rows(const std::vector<ConfigEntry>& rows, int n_rows, int n_cols) {
  if (static_cast<int>(rows.size()) != n_rows) {
    const ConfigEntry& where = rows.back();
    throw entry_error(where, fmt::format("{} occupancy rows given, grid has {}", rows.size(), n_rows));
  }
  std::vector<bool> occupancy;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& text = rows[r].value;
    if (static_cast<int>(text.size()) != n_cols) {
      throw entry_error(rows[r], fmt::format("row {} has length {}, expected {}", r, text.size(), n_cols));
    }
    for (std::size_t c = 0; c < text.size(); ++c) {
      if (text[c] != '.' && text[c] != '#') {
        throw entry_error(rows[r], fmt::format("row {} column {}: expected '.' or '#'", r, c));
      }
      occupancy.push_back(text[c] == '#');
    }
  }
  return occupancy;
}

std::string dimension_text(const ActionDimension& d, bool degrees) {
  const double scale = degrees ? 1.0 / kDeg : 1.0;
  return fmt::format("{},{},{}", d.min * scale, d.max * scale, d.count);
}

}  // namespace

AppConfig::AppConfig() : workspace(default_workspace()), catalog(default_catalog()) {}

double default_cell_pitch(const std::vector<BoxObject>& catalog, double gap) {
  double side = 0.0;
  for (const auto& o : catalog) {
    if (o.trained) side = std::max({side, o.width, o.depth});
  }
  if (side == 0.0) {
    for (const auto& o : catalog) side = std::max({side, o.width, o.depth});
  }
  return side + gap;
}

Workspace default_workspace() {
  constexpr double gap = 0.01;
  return Workspace(4, 5, default_cell_pitch(default_catalog(), gap), gap, WallSet::all(), 0.0);
}

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source) {
  std::vector<ConfigEntry> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    // '#' inside a row value marks an occupied cell, so comments in row
    // lines must be separated by whitespace.
    std::string body = line;
    const auto eq = line.find('=');
    const bool row_line = eq != std::string::npos && trim(line.substr(0, eq)) == "row";
    if (hash != std::string::npos) {
      if (!row_line) {
        body = line.substr(0, hash);
      } else {
        const auto value_start = line.find_first_not_of(" \t", eq + 1);
        const auto comment = value_start == std::string::npos ? value_start : line.find(" #", value_start);
        if (comment != std::string::npos) body = line.substr(0, comment);
      }
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto pos = body.find('=');
    if (pos == std::string::npos) throw ConfigError(source, line_no, "expected key = value");
    ConfigEntry e{trim(body.substr(0, pos)), trim(body.substr(pos + 1)), source, line_no};
    if (e.key.empty()) throw ConfigError(source, line_no, "empty key");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ConfigEntry> environment_entries(char** env) {
  std::vector<ConfigEntry> entries;
  if (!env) return entries;
  constexpr std::string_view prefix = "TOSSCTL_";
  for (char** p = env; *p; ++p) {
    const std::string_view item(*p);
    if (item.substr(0, prefix.size()) != prefix) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) continue;
    std::string name(item.substr(prefix.size(), eq - prefix.size()));
    std::string key;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
      }
    }
    entries.push_back({key, std::string(item.substr(eq + 1)), std::string(item.substr(0, eq)), 0});
  }
  return entries;
}

AppConfig build_config(const std::vector<std::vector<ConfigEntry>>& layers) {
  std::map<std::string, ConfigEntry> scalar;
  std::map<std::string, std::vector<ConfigEntry>> lists;
  for (const auto& layer : layers) {
    std::map<std::string, std::vector<ConfigEntry>> layer_lists;
    for (const auto& e : layer) {
      if (is_list_key(e.key)) {
        layer_lists[e.key].push_back(e);
      } else if (setters().contains(e.key)) {
        scalar[e.key] = e;
      } else {
        throw ConfigError(e.source, e.line, fmt::format("unknown key '{}'", e.key));
      }
    }
    for (auto& [key, items] : layer_lists) lists[key] = std::move(items);
  }

  Pending p;
  if (lists.contains("object")) {
    p.cfg.catalog.clear();
    for (const auto& e : lists["object"]) {
      try {
        p.cfg.catalog.push_back(to_object(e.value));
      } catch (const InvalidInput& err) {
        throw entry_error(e, err.what());
      }
    }
    try {
      validate_catalog(p.cfg.catalog);
    } catch (const InvalidInput& err) {
      throw entry_error(lists["object"].front(), err.what());
    }
  }
  for (const auto& [key, e] : scalar) {
    try {
      setters().at(key)(p, e.value);
    } catch (const InvalidInput& err) {
      throw entry_error(e, err.what());
    }
  }

  const double pitch = p.cell_pitch.value_or(default_cell_pitch(p.cfg.catalog, p.gap));
  try {
    std::vector<bool> occupancy(static_cast<std::size_t>(std::max(p.rows * p.cols, 0)), false);
    if (lists.contains("row") && p.rows >= 1 && p.cols >= 1) {
      occupancy = parse_rows(lists["row"], p.rows, p.cols);
    }
    p.cfg.workspace = Workspace(p.rows, p.cols, pitch, p.gap, p.walls, p.floor_height, occupancy);
  } catch (const InvalidInput& err) {
    const auto it = scalar.find("grid.rows");
    throw ConfigError(it != scalar.end() ? it->second.source : "<config>",
                      it != scalar.end() ? it->second.line : 0, err.what());
  }

  // Whole-section checks; errors point at the section rather than a line.
  const auto section = [&](const std::string& name, const auto& check) {
    try {
      check();
    } catch (const InvalidInput& err) {
      throw ConfigError("<config>", 0, name + ": " + err.what());
    }
  };
  section("reward", [&] { p.cfg.reward.validate(); });
  section("train", [&] { p.cfg.train.validate(); });
  section("arm", [&] { p.cfg.setup.arm.validate(); });
  section("sim", [&] { p.cfg.setup.sim.validate(); });
  section("action", [&] { p.cfg.setup.grid.validate(); });
  section("policy", [&] {
    p.cfg.policy.times.validate();
    if (p.cfg.policy.env_count < 1) throw InvalidInput("envs must be positive");
    if (p.cfg.policy.trials < 1) throw InvalidInput("trials must be positive");
    if (p.cfg.policy.jobs < 1) throw InvalidInput("jobs must be positive");
    if (!(p.cfg.policy.c5f3m2 >= 0.0 && p.cfg.policy.c5f3m2 <= 1.0)) {
      throw InvalidInput("c5f3m2 must lie in [0, 1]");
    }
  });
  p.cfg.train.seed = p.cfg.seed;
  return p.cfg;
}

AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      char** env) {
  std::vector<std::vector<ConfigEntry>> layers;
  if (file) layers.push_back(parse_config_text(read_text_file(*file), file->string()));
  layers.push_back(environment_entries(env));
  std::vector<ConfigEntry> flags;
  for (const auto& [key, value] : overrides) flags.push_back({key, value, "--" + key, 0});
  layers.push_back(std::move(flags));
  return build_config(layers);
}

std::string workspace_text(const Workspace& ws) {
  std::string out;
  out += fmt::format("grid.rows = {}\n", ws.rows());
  out += fmt::format("grid.cols = {}\n", ws.cols());
  out += fmt::format("grid.cell_pitch = {}\n", ws.cell_pitch());
  out += fmt::format("grid.gap = {}\n", ws.gap());
  out += fmt::format("grid.floor_height = {}\n", ws.floor_height());
  out += fmt::format("walls = {}\n", ws.walls().to_string());
  for (int r = 0; r < ws.rows(); ++r) {
    std::string row;
    for (int c = 0; c < ws.cols(); ++c) row += ws.occupied(r, c) ? '#' : '.';
    out += fmt::format("row = {}\n", row);
  }
  return out;
}

std::string config_text(const AppConfig& cfg) {
  std::string out;
  out += fmt::format("seed = {}\n", cfg.seed);
  out += fmt::format("output_dir = {}\n", cfg.output_dir);
  out += workspace_text(cfg.workspace);
  for (const auto& o : cfg.catalog) {
    out += fmt::format("object = {} {} {} {} {} {}\n", o.id, o.width, o.depth, o.height, o.category,
                       o.trained ? "trained" : "untrained");
  }
  const auto& r = cfg.reward;
  out += fmt::format("reward.alpha = {}\nreward.beta = {}\n", r.alpha, r.beta);
  out += fmt::format("reward.theta_bar_roll = {}\nreward.theta_bar_yaw = {}\n", r.theta_bar_roll,
                     r.theta_bar_yaw);
  out += fmt::format("reward.d_x_low = {}\nreward.d_y_low = {}\n", r.d_x_low, r.d_y_low);
  out += fmt::format("reward.d_x_high = {}\nreward.d_y_high = {}\n", r.d_x_high, r.d_y_high);
  out += fmt::format("reward.d_bar_z = {}\nreward.invert_rz = {}\n", r.d_bar_z, r.invert_rz);
  const auto& t = cfg.train;
  if (!cfg.train_object.empty()) out += fmt::format("train.object = {}\n", cfg.train_object);
  out += fmt::format("train.episodes = {}\ntrain.steps = {}\n", t.episodes, t.steps_per_episode);
  out += fmt::format("train.epsilon_start = {}\ntrain.epsilon_end = {}\n", t.epsilon_start,
                     t.epsilon_end);
  out += fmt::format("train.gamma = {}\ntrain.learning_rate = {}\n", t.gamma, t.learning_rate);
  out += fmt::format("train.batch_size = {}\ntrain.warm_start_episodes = {}\n", t.batch_size,
                     t.warm_start_episodes);
  out += fmt::format("train.replay_capacity = {}\ntrain.hidden = {}\n", t.replay_capacity,
                     fmt::join(t.hidden, ","));
  const auto& a = cfg.setup.arm;
  out += fmt::format("arm.shoulder_height = {}\n", a.shoulder_height);
  out += fmt::format("arm.link2 = {}\narm.link3 = {}\narm.link4 = {}\n", a.link_length[0],
                     a.link_length[1], a.link_length[2]);
  out += fmt::format("arm.release_stroke = {}\n", a.release_stroke);
  const auto& s = cfg.setup.sim;
  out += fmt::format("sim.time_step = {}\nsim.gravity = {}\nsim.standoff = {}\n", s.time_step,
                     s.gravity, s.standoff);
  out += fmt::format("sim.wall_height = {}\nsim.wall_thickness = {}\nsim.max_flight_time = {}\n",
                     s.wall_height, s.wall_thickness, s.max_flight_time);
  const auto& g = cfg.setup.grid.dims;
  out += fmt::format("action.q2 = {}\naction.q3 = {}\naction.q4 = {}\n", dimension_text(g[0], true),
                     dimension_text(g[1], true), dimension_text(g[2], true));
  out += fmt::format("action.w2 = {}\naction.w3 = {}\naction.w4 = {}\n", dimension_text(g[3], false),
                     dimension_text(g[4], false), dimension_text(g[5], false));
  const auto& pc = cfg.policy;
  out += fmt::format("policy.envs = {}\npolicy.c5f3m2 = {}\npolicy.table = {}\n", pc.env_count,
                     pc.c5f3m2, pc.table);
  out += fmt::format("policy.trials = {}\npolicy.jobs = {}\n", pc.trials, pc.jobs);
  if (!pc.checkpoint.empty()) out += fmt::format("policy.checkpoint = {}\n", pc.checkpoint);
  if (!pc.object.empty()) out += fmt::format("policy.object = {}\n", pc.object);
  out += fmt::format("policy.time_pp = {}\npolicy.time_pt = {}\n", pc.times.pick_and_place,
                     pc.times.pick_and_toss);
  return out;
}

Workspace load_workspace(const std::filesystem::path& file) {
  const auto entries = parse_config_text(read_text_file(file), file.string());
  std::vector<ConfigEntry> grid;
  for (const auto& e : entries) {
    if (e.key == "row" || e.key == "walls" || e.key.rfind("grid.", 0) == 0) {
      grid.push_back(e);
    } else {
      throw ConfigError(e.source, e.line, fmt::format("'{}' is not a workspace key", e.key));
    }
  }
  return build_config({grid}).workspace;
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string(), 0, "file not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("write failed: " + file.string());
}

}  // namespace tossing
