// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "tossing/checkpoint.hpp"
#include "tossing/config.hpp"
#include "tossing/environments.hpp"
#include "tossing/flight.hpp"
#include "tossing/learner.hpp"
#include "tossing/policy.hpp"
#include "tossing/reward.hpp"

using namespace tossing;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

// --- 1 ---------------------------------------------------------------------

Verdict reward_exactness() {
  Verdict v;
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  v.require(release_reward(true) == 1.0, "release success != 1");
  v.require(release_reward(false) == -10.0, "release failure != -10");
  v.require(near(rotation_reward(0, 0), 2.0), "rotation(0,0) != 2");
  v.require(near(rotation_reward(360, 180), 0.0), "rotation(360,180) != 0");
  v.require(near(rotation_reward(180, 90), 0.5), "rotation(180,90) != 0.5");
  v.require(near(position_reward(0.03, 0.03, 0.3), 2.0), "position(0.03,0.03,0.3) != 2");
  v.require(near(position_reward(0.09, 0.045, 0.3), 1.0), "position at x/y midpoints != 1");
  if (v.pass) v.detail = "all example values within 1e-9";
  return v;
}

// --- 2 ---------------------------------------------------------------------

Verdict cpattern_oracle() {
  Verdict v;
  long checked = 0;
  for (int bits = 0; bits < 16 && v.pass; ++bits) {
    const WallSet walls = WallSet::from_bits(static_cast<std::uint8_t>(bits));
    for (int occ = 0; occ < (1 << 9); ++occ) {
      std::vector<bool> cells(9);
      for (int i = 0; i < 9; ++i) cells[static_cast<std::size_t>(i)] = (occ >> i) & 1;
      const Workspace ws(3, 3, 0.143, 0.01, walls, 0.0, cells);
      const oracle::ContactMap map(ws);
      for (const auto& cell : ws.empty_cells()) {
        const auto [fixed, movable] = map.count(cell.row, cell.col);
        const CPattern cp = classify_cpattern(ws, cell);
        v.require(cp.n_fixed == fixed && cp.n_movable == movable && cp.n_contacts == fixed + movable,
                  fmt::format("mismatch at walls {} occupancy {} cell ({},{})", walls.to_string(), occ,
                              cell.row, cell.col));
        ++checked;
      }
    }
  }
  const auto all = enumerate_cpatterns();
  v.require(all.size() == 12, fmt::format("{} patterns enumerated", all.size()));
  if (v.pass) v.detail = fmt::format("{} slots match the map oracle; 12 patterns", checked);
  return v;
}

// --- 3 ---------------------------------------------------------------------

Verdict policy_structure() {
  Verdict v;
  const auto groups = rank_cpatterns(SuccessRateTable::builtin());
  const auto policies = build_policy_patterns(groups);
  v.require(groups.size() == 9, fmt::format("{} rank groups", groups.size()));
  v.require(policies.size() == 10, fmt::format("{} policies", policies.size()));
  for (std::size_t k = 1; k < policies.size(); ++k) {
    v.require(std::includes(policies[k].pt_patterns.begin(), policies[k].pt_patterns.end(),
                            policies[k - 1].pt_patterns.begin(), policies[k - 1].pt_patterns.end()),
              fmt::format("P{} does not contain P{}", k, k - 1));
  }
  int pairs = 0;
  for (const auto& cp : enumerate_cpatterns()) {
    for (std::size_t k = 1; k < policies.size(); ++k) {
      const bool before = assign_task(policies[k - 1], cp) == Task::pick_and_toss;
      const bool now = assign_task(policies[k], cp) == Task::pick_and_toss;
      v.require(!before || now, fmt::format("{} tossed in P{} but placed in P{}", cp.label(), k - 1, k));
      ++pairs;
    }
  }
  v.require(assign_task(policies.front(), enumerate_cpatterns().front()) == Task::pick_and_place,
            "P0 tosses");
  if (v.pass) v.detail = fmt::format("9 groups, 10 nested policies, {} monotone (k, pattern) steps", pairs);
  return v;
}

// --- 4 ---------------------------------------------------------------------

Verdict tradeoff() {
  Verdict v;
  const AppConfig cfg;
  const auto envs = generate_environments(cfg.workspace, 48, derive_seed(cfg.seed, "environments"));
  const SuccessRateTable table = SuccessRateTable::builtin();
  const TaskTimes times;
  v.require(times.pick_and_place == 14.0 && times.pick_and_toss == 9.5, "default times changed");
  const SearchResult result = brute_force_search(envs, table, times);

  oracle::Direct d0;
  std::size_t oracle_best = 0;
  double oracle_best_obj = -1.0;
  for (std::size_t k = 0; k < result.policies.size(); ++k) {
    const auto& ev = result.evaluations[k];
    const oracle::Direct d = oracle::direct_score(result.policies[k], envs, table, times);
    v.require(std::abs(ev.f1 - d.f1()) <= 1e-12 && std::abs(ev.f2 - d.f2()) <= 1e-12,
              fmt::format("P{} differs from the oracle", k));
    if (d.f1() + d.f2() > oracle_best_obj) {
      oracle_best_obj = d.f1() + d.f2();
      oracle_best = k;
    }
    if (k > 0) {
      v.require(ev.f1 <= result.evaluations[k - 1].f1, fmt::format("f1 rises at P{}", k));
      v.require(ev.f2 >= result.evaluations[k - 1].f2, fmt::format("f2 falls at P{}", k));
    }
    if (k == 0) d0 = d;
  }

  // Pattern counts from the map oracle must equal the library's integer counts.
  PatternCounts counts;
  for (Workspace ws : envs) {
    for (int r = 0; r < ws.rows(); ++r) {
      for (int c = 0; c < ws.cols(); ++c) {
        if (ws.occupied(r, c)) continue;
        const auto [fixed, movable] = oracle::ContactMap(ws).count(r, c);
        ++counts[*CPattern::make(fixed, movable)];
        ws = ws.with_occupied({r, c});
      }
    }
  }
  v.require(counts == count_placements(envs), "placement counts differ from the oracle");
  v.require(static_cast<int>(oracle_best) == result.best,
            fmt::format("search picks P{}, oracle P{}", result.best, oracle_best));
  v.require(result.best >= 5 && result.best <= 7, fmt::format("argmax P{} outside P5..P7", result.best));
  if (v.pass) {
    v.detail = fmt::format("argmax P{} (f1+f2 = {:.4f}) over {} placements; oracle agrees",
                           result.best, result.evaluations[static_cast<std::size_t>(result.best)].objective,
                           d0.n);
  }
  return v;
}

// --- 5 ---------------------------------------------------------------------

Verdict learning_progress() {
  Verdict v;
  const AppConfig cfg;
  TrainConfig tc = cfg.train;
  tc.episodes = 300;
  tc.steps_per_episode = 30;
  tc.seed = 7;
  const std::array<int, 6> reduced{7, 6, 5, 6, 5, 6};
  v.require(cfg.setup.grid.cardinalities() == reduced, "action grid is not 7x6x5x6x5x6");
  const BoxObject object = cfg.catalog.front();

  const auto first = run_training(cfg.setup, cfg.reward, tc, object, cfg.workspace);
  const auto second = run_training(cfg.setup, cfg.reward, tc, object, cfg.workspace);
  v.require(training_log_csv(first.log) == training_log_csv(second.log), "same-seed logs differ");

  double lo = first.log.front().total_reward;
  double hi = lo;
  double head = 0.0;
  double tail = 0.0;
  const std::size_t n = first.log.size();
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, first.log[i].total_reward);
    hi = std::max(hi, first.log[i].total_reward);
  }
  for (std::size_t i = 0; i < 50; ++i) {
    head += first.log[i].total_reward / 50.0;
    tail += first.log[n - 50 + i].total_reward / 50.0;
  }
  const double gain = (tail - head) / (hi - lo);
  v.require(gain >= 0.20, fmt::format("gain {:.3f} of observed range is below 0.20", gain));
  if (v.pass) {
    v.detail = fmt::format("first-50 mean {:.2f}, last-50 mean {:.2f}, range [{:.2f}, {:.2f}], gain {:.3f}; "
                           "logs identical",
                           head, tail, lo, hi, gain);
  }
  return v;
}

// --- 6 ---------------------------------------------------------------------

Verdict physics_oracle() {
  Verdict v;
  const Workspace ws(4, 5, 0.143, 0.01, WallSet{}, 0.0);
  const Slot target = make_slot(ws, {0, 0});
  const SimConfig sim;
  v.require(sim.time_step == 1e-3, "time step is not 1 ms");
  const BoxObject box = AppConfig().catalog.front();
  double worst = 0.0;
  struct Case { double x0, z0, vx, vz; };
  for (const Case c : {Case{0.2, 0.5, 1.5, 1.0}, Case{0.0, 0.3, 2.2, -0.4}, Case{0.4, 0.9, 0.7, 2.5},
                       Case{0.1, 0.2, 3.0, 0.0}, Case{0.3, 0.45, 1.1, 1.9}}) {
    ReleaseState r;
    r.position = {c.x0, 0.0, c.z0};
    r.linear_velocity = {c.vx, 0.0, c.vz};
    r.released = true;
    std::vector<TrajectorySample> trace;
    const TossOutcome out = simulate_flight(r, ws, target, box, sim, &trace);
    const auto ref = oracle::projectile(c.vx, c.vz, c.z0 - box.height / 2.0, 0.0, sim.gravity);
    const double landed = sim.standoff + (c.x0 + ref.range >= sim.standoff ? out.d_x : -out.d_x);
    worst = std::max({worst, oracle::relative_error(out.flight_time, ref.time),
                      oracle::relative_error(landed - c.x0, ref.range)});
    for (const auto& s : trace) {
      v.require(s.velocity.x() == c.vx && s.velocity.y() == 0.0, "horizontal velocity drifted");
    }
  }
  v.require(worst < 1e-6, fmt::format("worst relative error {:.2e}", worst));
  if (v.pass) v.detail = fmt::format("worst relative error {:.2e}; vx, vy exact every step", worst);
  return v;
}

// --- 7 ---------------------------------------------------------------------

Verdict gradient_check() {
  Verdict v;
  double worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) worst = std::max(worst, oracle::gradient_check(seed));
  v.require(worst < 1e-4, fmt::format("worst relative error {:.2e}", worst));
  if (v.pass) v.detail = fmt::format("4->8->8->heads, worst relative error {:.2e}", worst);
  return v;
}

// --- 8 ---------------------------------------------------------------------

Verdict transfer() {
  Verdict v;
  const auto catalog = default_catalog();
  std::vector<std::string> mapped;
  for (const auto& unknown : catalog) {
    if (unknown.trained) continue;
    const BoxObject* best = nullptr;
    double best_sse = 0.0;
    for (const auto& c : catalog) {
      if (!c.trained) continue;
      const double e = oracle::sse(unknown.width, unknown.depth, unknown.height, c.width, c.depth, c.height);
      if (!best || e < best_sse) {
        best = &c;
        best_sse = e;
      }
    }
    const std::string got = transfer_similar_object(unknown, catalog).id;
    v.require(best && got == best->id, fmt::format("{} -> {}, oracle {}", unknown.id, got, best ? best->id : "-"));
    v.require(got == "O" + unknown.id.substr(1), fmt::format("{} -> {}", unknown.id, got));
    mapped.push_back(unknown.id + "->" + got);
  }
  v.require(mapped.size() == 3, "expected three untrained objects");
  if (v.pass) v.detail = fmt::format("{}", fmt::join(mapped, ", "));
  return v;
}

// --- 9 ---------------------------------------------------------------------

Verdict checkpoint_round_trip() {
  Verdict v;
  TrainConfig tc;
  tc.seed = 99;
  const QFunction q = initial_qfunction(ActionGrid::desk_default(), tc);
  const auto path = std::filesystem::temp_directory_path() / "tossing_acceptance.tqck";
  save_checkpoint(q, path);
  const QFunction back = load_checkpoint(path, ActionGrid::desk_default().cardinalities());
  Rng rng(3);
  const BoxObject box = default_catalog().front();
  for (int i = 0; i < 100; ++i) {
    const GraspState s = sample_grasp(box, rng);
    const Eigen::VectorXf a = q.values(s);
    const Eigen::VectorXf b = back.values(s);
    v.require(std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0,
              fmt::format("state {} differs after reload", i));
  }
  std::filesystem::remove(path);

  const auto bytes = serialize_checkpoint(q);
  const auto rejects = [&](std::vector<std::uint8_t> bad, CheckpointError::Check want,
                           std::optional<std::array<int, 6>> heads = std::nullopt) {
    try {
      deserialize_checkpoint(bad, heads);
    } catch (const CheckpointError& e) {
      return e.check() == want;
    }
    return false;
  };
  auto magic = bytes;
  magic[1] = 'X';
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  auto flipped = bytes;
  flipped[bytes.size() / 3] ^= 0x01;
  v.require(rejects(magic, CheckpointError::Check::magic), "bad magic not named");
  v.require(rejects(truncated, CheckpointError::Check::checksum), "truncation not named");
  v.require(rejects(flipped, CheckpointError::Check::checksum), "bit flip not named");
  v.require(rejects(bytes, CheckpointError::Check::dimensions, std::array<int, 6>{6, 6, 6, 6, 6, 6}),
            "head mismatch not named");
  if (v.pass) v.detail = "100 states bit-exact; magic, checksum and dimension failures named";
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "reward exactness", 1.0, reward_exactness},
      {2, "contact pattern oracle", 5.0, cpattern_oracle},
      {3, "policy structure", 1.0, policy_structure},
      {4, "trade-off and argmax", 10.0, tradeoff},
      {5, "learning progress", 600.0, learning_progress},
      {6, "physics oracle", 60.0, physics_oracle},
      {7, "gradient check", 60.0, gradient_check},
      {8, "transfer determinism", 60.0, transfer},
      {9, "checkpoint round trip", 60.0, checkpoint_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.pass && secs > c.budget_s) {
      v = {false, fmt::format("took {:.2f} s, budget {:.0f} s", secs, c.budget_s)};
    }
    failures += v.pass ? 0 : 1;
    fmt::print("{} [{}] {}: {} ({:.2f} s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
