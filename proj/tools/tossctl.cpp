// tossctl: train tossing motions, search PP/PT policies, classify slots,
// run single tosses and export plot data.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tossing/checkpoint.hpp"
#include "tossing/config.hpp"
#include "tossing/environments.hpp"
#include "tossing/errors.hpp"
#include "tossing/io.hpp"
#include "tossing/learner.hpp"
#include "tossing/policy.hpp"
#include "tossing/reward.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace tossing;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> set;
  std::vector<std::pair<std::string, std::string>> overrides;

  void flag(const std::string& key, const std::string& value) { overrides.emplace_back(key, value); }

  AppConfig load() {
    std::vector<std::pair<std::string, std::string>> all;
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set", 0, "expected key=value, got " + kv);
      all.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // Dedicated flags come after --set so they win.
    if (seed) all.emplace_back("seed", std::to_string(*seed));
    if (!out.empty()) all.emplace_back("output_dir", out);
    all.insert(all.end(), overrides.begin(), overrides.end());
    std::optional<fs::path> file;
    if (!config.empty()) file = config;
    return load_config(file, all, environ);
  }
};

class Manifest {
public:
  Manifest(std::string command, const AppConfig& cfg)
      : command_(std::move(command)), cfg_(cfg), start_(std::chrono::steady_clock::now()) {}

  void output(const fs::path& p) { outputs_.push_back(p); }
  void extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  // Checks that every output exists and is non-empty, then writes the manifest.
  fs::path write() {
    for (const auto& p : outputs_) {
      std::error_code ec;
      if (!fs::exists(p, ec) || fs::file_size(p, ec) == 0) {
        throw Error("artifact missing or empty: " + p.string());
      }
    }
    nlohmann::json j;
    j["command"] = command_;
    j["seed"] = cfg_.seed;
    j["config"] = config_text(cfg_);
    j["versions"] = {{"tossctl", kVersion},
                     {"checkpoint_format", kCheckpointVersion},
                     {"domain", 1},
                     {"toss_sim", 1},
                     {"reward", 1},
                     {"learner", 1},
                     {"policy", 1}};
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& p : outputs_) outs.push_back(p.string());
    j["outputs"] = outs;
    j["duration_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    const fs::path path = fs::path(cfg_.output_dir) / (command_ + "_manifest.json");
    write_text_file(path, j.dump(2) + "\n");
    return path;
  }

private:
  std::string command_;
  AppConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<fs::path> outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
};

const BoxObject& find_object(const AppConfig& cfg, const std::string& id) {
  for (const auto& o : cfg.catalog) {
    if (o.id == id) return o;
  }
  throw InvalidInput(fmt::format("object '{}' is not in the catalog", id));
}

fs::path checkpoint_path(const std::string& out_dir, const std::string& object_id) {
  return fs::path(out_dir) / fmt::format("q_{}.tqck", object_id);
}

// --- train -----------------------------------------------------------------

int cmd_train(Common& common) {
  AppConfig cfg = common.load();
  Manifest manifest("train", cfg);

  std::vector<BoxObject> objects;
  if (!cfg.train_object.empty()) {
    objects.push_back(find_object(cfg, cfg.train_object));
  } else {
    for (const auto& o : cfg.catalog) {
      if (o.trained) objects.push_back(o);
    }
  }
  if (objects.empty()) throw InvalidInput("no object to train");
  const Slot target = select_placement_slot(cfg.workspace);
  fmt::print("target slot ({},{}) {}\n", target.row, target.col, target.cpattern.label());

  nlohmann::json summary = nlohmann::json::object();
  for (const auto& object : objects) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, "object." + object.id);
    QFunction q0 = warm_start(cfg.setup, tc, object, cfg.workspace);
    TrainingResult result = run_training(cfg.setup, cfg.reward, tc, object, cfg.workspace, std::move(q0));

    const fs::path log_path = fs::path(cfg.output_dir) / fmt::format("train_log_{}.csv", object.id);
    write_text_file(log_path, training_log_csv(result.log));
    const fs::path ckpt = checkpoint_path(cfg.output_dir, object.id);
    save_checkpoint(result.q, ckpt);
    manifest.output(log_path);
    manifest.output(ckpt);

    const std::size_t n = result.log.size();
    const std::size_t window = std::min<std::size_t>(50, n);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      first += result.log[i].total_reward;
      last += result.log[n - 1 - i].total_reward;
    }
    first /= static_cast<double>(window);
    last /= static_cast<double>(window);
    fmt::print("{}: {} episodes, mean episode reward first {} = {:.3f}, last {} = {:.3f}\n",
               object.id, n, window, first, window, last);
    summary[object.id] = {{"first_window_mean", first}, {"last_window_mean", last}};
  }
  manifest.extra("summary", summary);
  fmt::print("manifest: {}\n", manifest.write().string());
  return kOk;
}

// --- search ----------------------------------------------------------------

int cmd_search(Common& common, const std::string& export_dir) {
  AppConfig cfg = common.load();
  Manifest manifest("search", cfg);
  const auto envs =
      generate_environments(cfg.workspace, cfg.policy.env_count, derive_seed(cfg.seed, "environments"));

  SuccessRateTable table;
  if (cfg.policy.table == "builtin") {
    table = SuccessRateTable::builtin(cfg.policy.c5f3m2);
  } else if (cfg.policy.table == "simulated") {
    if (cfg.policy.checkpoint.empty()) {
      throw InvalidInput("simulated table needs --checkpoint");
    }
    std::string object_id = cfg.policy.object;
    if (object_id.empty()) {
      for (const auto& o : cfg.catalog) {
        if (o.trained) {
          object_id = o.id;
          break;
        }
      }
    }
    const BoxObject& object = find_object(cfg, object_id);
    const QFunction q = load_checkpoint(cfg.policy.checkpoint, cfg.setup.grid.cardinalities());
    table = estimate_table_from_sim(q, cfg.setup, object, envs, cfg.policy.trials,
                                    derive_seed(cfg.seed, "policy.table"));
  } else {
    table = parse_success_table_csv(read_text_file(cfg.policy.table), cfg.policy.table);
    table.validate();
  }

  const SearchResult result = brute_force_search(envs, table, cfg.policy.times, cfg.policy.jobs);
  const fs::path eval_path = fs::path(cfg.output_dir) / "policy_eval.csv";
  const fs::path table_path = fs::path(cfg.output_dir) / "success_table.csv";
  write_text_file(eval_path, policy_report_csv(result.evaluations));
  write_text_file(table_path, success_table_csv(table));
  manifest.output(eval_path);
  manifest.output(table_path);
  if (!export_dir.empty()) {
    for (const auto& p : export_environments(envs, export_dir)) manifest.output(p);
  }

  if (!result.policies.front().nine_group_ranking) {
    fmt::print("note: {} rank groups, so {} policies\n", result.groups.size(), result.policies.size());
  }
  const auto& best = result.evaluations[static_cast<std::size_t>(result.best)];
  fmt::print("table source: {}\n", to_string(table.source()));
  for (const auto& ev : result.evaluations) {
    fmt::print("P{}  f1 {:.4f}  f2 {:.4f}  f1+f2 {:.4f}\n", ev.policy, ev.f1, ev.f2, ev.objective);
  }
  fmt::print("best policy: P{} (f1+f2 = {:.4f})\n", best.policy, best.objective);
  manifest.extra("best_policy", best.policy);
  fmt::print("manifest: {}\n", manifest.write().string());
  return kOk;
}

// --- classify --------------------------------------------------------------

int cmd_classify(const std::string& workspace_file) {
  const Workspace ws = load_workspace(workspace_file);
  fmt::print("row,col,cpattern\n");
  for (const auto& cell : ws.empty_cells()) {
    fmt::print("{},{},{}\n", cell.row, cell.col, classify_cpattern(ws, cell).label());
  }
  return kOk;
}

// --- toss ------------------------------------------------------------------

struct TossArgs {
  std::string checkpoint;
  std::string workspace;
  std::string slot;
  std::string object;
  std::string grasp;
  std::string trajectory;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidInput(fmt::format("{}: '{}' is not a number", what, item));
    }
  }
  if (values.size() != expected) {
    throw InvalidInput(fmt::format("{} needs {} comma-separated values", what, expected));
  }
  return values;
}

int cmd_toss(Common& common, const TossArgs& args) {
  AppConfig cfg = common.load();
  Manifest manifest("toss", cfg);
  const Workspace ws = args.workspace.empty() ? cfg.workspace : load_workspace(args.workspace);

  Slot slot;
  if (args.slot.empty()) {
    slot = select_placement_slot(ws);
  } else {
    const auto rc = parse_list(args.slot, 2, "--slot");
    const GridCell cell{static_cast<int>(rc[0]), static_cast<int>(rc[1])};
    if (!ws.in_bounds(cell.row, cell.col)) {
      throw InvalidInput(fmt::format("slot ({},{}) is outside the grid", cell.row, cell.col));
    }
    if (ws.occupied(cell)) {
      throw PreconditionViolation(fmt::format("slot ({},{}) is occupied", cell.row, cell.col));
    }
    slot = make_slot(ws, cell);
  }

  std::string object_id = args.object;
  if (object_id.empty()) {
    for (const auto& o : cfg.catalog) {
      if (o.trained) {
        object_id = o.id;
        break;
      }
    }
  }
  const BoxObject& object = find_object(cfg, object_id);
  BoxObject donor = object;
  if (!object.trained) {
    donor = transfer_similar_object(object, cfg.catalog);
    fmt::print("object {} is untrained; using parameters of {}\n", object.id, donor.id);
  }

  fs::path ckpt = args.checkpoint;
  if (fs::is_directory(ckpt)) ckpt = ckpt / fmt::format("q_{}.tqck", donor.id);
  const QFunction q = load_checkpoint(ckpt, cfg.setup.grid.cardinalities());

  GraspState grasp;
  if (args.grasp.empty()) {
    Rng rng(derive_seed(cfg.seed, "toss.grasp"));
    grasp = sample_grasp(object, rng);
  } else {
    const auto g = parse_list(args.grasp, 4, "--grasp");
    grasp = {g[0], g[1], g[2] * M_PI / 180.0, g[3]};
  }
  grasp.validate();

  const TossAction action = q.greedy(grasp);
  std::vector<TrajectorySample> trace;
  const TossOutcome outcome = simulate_toss(cfg.setup, action, grasp, ws, slot, object, &trace);
  const double reward = total_reward(outcome, cfg.reward);

  const fs::path traj = args.trajectory.empty() ? fs::path(cfg.output_dir) / "trajectory.csv"
                                                : fs::path(args.trajectory);
  write_text_file(traj, trajectory_csv(trace));
  manifest.output(traj);

  fmt::print("slot ({},{}) {}\n", slot.row, slot.col, slot.cpattern.label());
  fmt::print("grasp: x {:.4f} z {:.4f} angle {:.3f} deg opening {:.4f} m\n", grasp.grasp_x,
             grasp.grasp_z, grasp.gripper_angle * 180.0 / M_PI, grasp.gripper_opening);
  fmt::print("action: {}\n", fmt::join(action.index, " "));
  fmt::print("release_success: {}\n", outcome.release_success);
  fmt::print("collided: {}\n", outcome.collided);
  fmt::print("rest_face: {}\n", to_string(outcome.rest_face));
  fmt::print("theta_roll: {:.3f}\ntheta_yaw: {:.3f}\n", outcome.theta_roll, outcome.theta_yaw);
  fmt::print("d_x: {:.5f}\nd_y: {:.5f}\nd_z: {:.5f}\n", outcome.d_x, outcome.d_y, outcome.d_z);
  fmt::print("landed: x {:.5f} y {:.5f} yaw {:.3f} deg\n", outcome.landed_pose.x,
             outcome.landed_pose.y, outcome.landed_pose.yaw * 180.0 / M_PI);
  fmt::print("flight_time: {:.4f}\n", outcome.flight_time);
  fmt::print("success: {}\n", toss_succeeded(outcome, ws.gap()));
  fmt::print("reward: {:.6f}\n", reward);
  manifest.extra("donor", donor.id);
  manifest.extra("reward", reward);
  fmt::print("manifest: {}\n", manifest.write().string());
  return kOk;
}

// --- report ----------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& header) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ConfigError(path, 1, "expected header " + header);
  }
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double field_number(const std::vector<std::string>& row, std::size_t i, const std::string& path) {
  try {
    return std::stod(row.at(i));
  } catch (const std::exception&) {
    throw ConfigError(path, 0, fmt::format("bad numeric field {}", i));
  }
}

int cmd_report(Common& common, const std::string& log_path, const std::string& policy_path) {
  AppConfig cfg = common.load();
  if (log_path.empty() && policy_path.empty()) {
    throw InvalidInput("report needs --log and/or --policy");
  }
  Manifest manifest("report", cfg);
  if (!log_path.empty()) {
    std::vector<std::vector<double>> cols(4);
    for (const auto& row : read_csv(log_path, "episode,total_reward,mean_reward,epsilon,loss")) {
      for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(field_number(row, c, log_path));
    }
    const fs::path out = fs::path(cfg.output_dir) / "training_curve.dat";
    write_text_file(out, gnuplot_columns({"episode", "total_reward", "mean_reward", "epsilon"}, cols));
    manifest.output(out);
    fmt::print("wrote {}\n", out.string());
  }
  if (!policy_path.empty()) {
    std::vector<std::vector<double>> cols(4);
    for (const auto& row : read_csv(policy_path, "policy,f1,f2,objective")) {
      if (row.empty() || row[0].empty() || row[0][0] != 'P') {
        throw ConfigError(policy_path, 0, "policy names look like P0..P9");
      }
      std::vector<std::string> numeric = row;
      numeric[0] = row[0].substr(1);
      for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(field_number(numeric, c, policy_path));
    }
    const fs::path out = fs::path(cfg.output_dir) / "policy_tradeoff.dat";
    write_text_file(out, gnuplot_columns({"policy", "f1", "f2", "objective"}, cols));
    manifest.output(out);
    fmt::print("wrote {}\n", out.string());
  }
  fmt::print("manifest: {}\n", manifest.write().string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toss-aware object arrangement toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("-c,--config", common.config, "key = value configuration file");
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("-o,--out", common.out, "output directory");
  app.add_option("--set", common.set, "override a config key (key=value), repeatable");

  auto* train = app.add_subcommand("train", "warm start then train each object");
  std::optional<int> episodes;
  std::optional<int> warm;
  std::string train_object;
  train->add_option("--episodes", episodes, "training episodes");
  train->add_option("--warm-episodes", warm, "warm-start episodes");
  train->add_option("--object", train_object, "train only this object id");

  auto* search = app.add_subcommand("search", "brute-force policy search over generated environments");
  std::optional<int> envs;
  std::optional<int> jobs;
  std::string table;
  std::string search_ckpt;
  std::string export_dir;
  search->add_option("--envs", envs, "number of environments");
  search->add_option("--jobs", jobs, "worker threads");
  search->add_option("--table", table, "builtin, simulated, or a success-table CSV");
  search->add_option("--checkpoint", search_ckpt, "checkpoint for the simulated table");
  search->add_option("--export-envs", export_dir, "write the environment set to this directory");

  auto* classify = app.add_subcommand("classify", "print the contact pattern of every empty slot");
  std::string ws_file;
  classify->add_option("workspace", ws_file, "workspace file")->required();

  auto* toss = app.add_subcommand("toss", "one greedy toss with a trained network");
  TossArgs toss_args;
  toss->add_option("--checkpoint", toss_args.checkpoint, "checkpoint file or training output directory")
      ->required();
  toss->add_option("--workspace", toss_args.workspace, "workspace file (default: config grid)");
  toss->add_option("--slot", toss_args.slot, "target slot as row,col");
  toss->add_option("--object", toss_args.object, "object id; untrained objects borrow a similar one");
  toss->add_option("--grasp", toss_args.grasp, "x,z,angle_deg,opening (default: sampled)");
  toss->add_option("--trajectory", toss_args.trajectory, "trajectory CSV path");

  auto* report = app.add_subcommand("report", "write gnuplot data from training logs and policy reports");
  std::string log_path;
  std::string policy_path;
  report->add_option("--log", log_path, "training log CSV");
  report->add_option("--policy", policy_path, "policy evaluation CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*train) {
      if (episodes) common.flag("train.episodes", std::to_string(*episodes));
      if (warm) common.flag("train.warm_start_episodes", std::to_string(*warm));
      if (!train_object.empty()) common.flag("train.object", train_object);
      return cmd_train(common);
    }
    if (*search) {
      if (envs) common.flag("policy.envs", std::to_string(*envs));
      if (jobs) common.flag("policy.jobs", std::to_string(*jobs));
      if (!table.empty()) common.flag("policy.table", table);
      if (!search_ckpt.empty()) common.flag("policy.checkpoint", search_ckpt);
      return cmd_search(common, export_dir);
    }
    if (*classify) return cmd_classify(ws_file);
    if (*toss) return cmd_toss(common, toss_args);
    if (*report) return cmd_report(common, log_path, policy_path);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const InvalidInput& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const PreconditionViolation& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const GeometryError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const NoSlotError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const CoverageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const NoMatchError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kValidation;
}
