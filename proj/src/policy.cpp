#include "tossing/policy.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "tossing/errors.hpp"
#include "tossing/random.hpp"

namespace tossing {

std::string to_string(RateSource source) {
  switch (source) {
    case RateSource::builtin: return "builtin";
    case RateSource::simulated: return "simulated";
    case RateSource::file: return "file";
  }
  return "?";
}

SuccessRateTable::SuccessRateTable(std::map<CPattern, double> rates, RateSource source)
    : rates_(std::move(rates)), source_(source) {}

SuccessRateTable SuccessRateTable::builtin(double c5f3m2) {
  // Rows by fixed surfaces, columns by total contacts.
  const std::map<CPattern, double> measured = {
      {*CPattern::make(1, 0), 1.00}, {*CPattern::make(1, 1), 0.75}, {*CPattern::make(1, 2), 0.50},
      {*CPattern::make(1, 3), 0.25}, {*CPattern::make(1, 4), 0.00},
      {*CPattern::make(2, 0), 1.00}, {*CPattern::make(2, 1), 0.83}, {*CPattern::make(2, 2), 0.67},
      {*CPattern::make(2, 3), 0.43},
      {*CPattern::make(3, 0), 1.00}, {*CPattern::make(3, 1), 0.75},
  };
  SuccessRateTable table(measured, RateSource::builtin);
  table.set(*CPattern::make(3, 2), c5f3m2);
  return table;
}

double SuccessRateTable::rate(const CPattern& cp) const {
  const auto it = rates_.find(cp);
  if (it == rates_.end()) throw MissingPatternError("no success rate for " + cp.label());
  return it->second;
}

void SuccessRateTable::set(const CPattern& cp, double rate) {
  if (!cp.valid()) throw InvalidInput("invalid contact pattern");
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InvalidInput(fmt::format("rate {} for {} outside [0, 1]", rate, cp.label()));
  }
  rates_[cp] = rate;
}

bool SuccessRateTable::complete() const {
  for (const auto& cp : enumerate_cpatterns()) {
    if (!rates_.contains(cp)) return false;
  }
  return true;
}

void SuccessRateTable::validate() const {
  for (const auto& cp : enumerate_cpatterns()) {
    const double r = rate(cp);
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidInput(fmt::format("rate {} for {} outside [0, 1]", r, cp.label()));
    }
  }
}

std::string success_table_csv(const SuccessRateTable& table) {
  std::string out = "n_contacts,n_fixed,rate\n";
  for (const auto& [cp, rate] : table.rates()) {
    out += fmt::format("{},{},{:.6f}\n", cp.n_contacts, cp.n_fixed, rate);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

SuccessRateTable parse_success_table_csv(const std::string& text, const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  SuccessRateTable table({}, RateSource::file);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (!header) {
      if (row != "n_contacts,n_fixed,rate") {
        throw ConfigError(source_name, line_no, "expected header n_contacts,n_fixed,rate");
      }
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(row);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 3) throw ConfigError(source_name, line_no, "expected three fields");
    int contacts = 0;
    int fixed = 0;
    double rate = 0.0;
    if (!parse_number(fields[0], contacts) || !parse_number(fields[1], fixed) ||
        !parse_number(fields[2], rate)) {
      throw ConfigError(source_name, line_no, "malformed number");
    }
    const auto cp = CPattern::make(fixed, contacts - fixed);
    if (!cp) {
      throw ConfigError(source_name, line_no,
                        fmt::format("no pattern with {} contacts and {} fixed", contacts, fixed));
    }
    if (table.rates().contains(*cp)) {
      throw ConfigError(source_name, line_no, "duplicate row for " + cp->label());
    }
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw ConfigError(source_name, line_no, "rate outside [0, 1]");
    }
    table.set(*cp, rate);
  }
  if (!header) throw ConfigError(source_name, 0, "empty success table");
  return table;
}

std::vector<RankGroup> rank_cpatterns(const SuccessRateTable& table) {
  table.validate();
  std::vector<RankGroup> groups;
  for (const auto& cp : enumerate_cpatterns()) {
    const double r = table.rate(cp);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [r](const RankGroup& g) { return g.rate == r; });
    if (it == groups.end()) {
      groups.push_back({r, {cp}});
    } else {
      it->patterns.push_back(cp);
    }
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const RankGroup& a, const RankGroup& b) { return a.rate > b.rate; });
  for (auto& g : groups) std::sort(g.patterns.begin(), g.patterns.end());
  return groups;
}

std::vector<PolicyPattern> build_policy_patterns(const std::vector<RankGroup>& groups) {
  std::vector<PolicyPattern> policies;
  PolicyPattern current;
  current.nine_group_ranking = groups.size() == 9;
  for (int k = 0; k <= static_cast<int>(groups.size()); ++k) {
    current.index = k;
    if (k > 0) {
      current.pt_groups.push_back(k - 1);
      const auto& added = groups[static_cast<std::size_t>(k - 1)].patterns;
      current.pt_patterns.insert(current.pt_patterns.end(), added.begin(), added.end());
      std::sort(current.pt_patterns.begin(), current.pt_patterns.end());
    }
    policies.push_back(current);
  }
  return policies;
}

Task assign_task(const PolicyPattern& policy, const CPattern& cp) {
  if (!cp.valid()) throw InvalidInput("invalid contact pattern");
  return std::binary_search(policy.pt_patterns.begin(), policy.pt_patterns.end(), cp)
             ? Task::pick_and_toss
             : Task::pick_and_place;
}

std::vector<CPattern> placement_sequence(const Workspace& ws) {
  std::vector<CPattern> seq;
  Workspace current = ws;
  for (const auto& cell : placement_order(ws, SlotRule::row_major)) {
    if (ws.occupied(cell)) continue;
    seq.push_back(classify_cpattern(current, cell));
    current = current.with_occupied(cell);
  }
  return seq;
}

PatternCounts count_placements(const std::vector<Workspace>& envs, int jobs) {
  if (envs.empty()) throw InvalidInput("environment list is empty");
  if (jobs < 1) throw InvalidInput("jobs must be at least 1");
  std::vector<std::vector<CPattern>> sequences(envs.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), envs.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < envs.size(); ++i) sequences[i] = placement_sequence(envs[i]);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < envs.size(); i += workers) {
            sequences[i] = placement_sequence(envs[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  PatternCounts counts;
  for (const auto& cp : enumerate_cpatterns()) counts[cp] = 0;
  for (const auto& seq : sequences) {
    for (const auto& cp : seq) ++counts[cp];
  }
  return counts;
}

namespace {

struct Extremes {
  double placements = 0.0;
  double successes_all_pt = 0.0;
  double time_all_pp = 0.0;
  double time_all_pt = 0.0;
};

Extremes extremes(const PatternCounts& counts, const SuccessRateTable& table,
                  const TaskTimes& times) {
  Extremes e;
  for (const auto& [cp, n] : counts) {
    if (n == 0) continue;
    const double count = static_cast<double>(n);
    e.placements += count;
    e.successes_all_pt += count * table.rate(cp);
    e.time_all_pp += count * times.pick_and_place;
    e.time_all_pt += count * times.pick_and_toss;
  }
  return e;
}

PolicyEvaluation finish(int policy, double successes, double time, const Extremes& e) {
  PolicyEvaluation ev;
  ev.policy = policy;
  ev.accuracy = successes / e.placements;
  ev.total_time = time;
  const double accuracy_span = e.placements - e.successes_all_pt;
  ev.f1 = accuracy_span > 0.0 ? (successes - e.successes_all_pt) / accuracy_span : 1.0;
  const double time_span = e.time_all_pp - e.time_all_pt;
  ev.f2 = time_span != 0.0 ? (e.time_all_pp - time) / time_span : 0.0;
  ev.objective = ev.f1 + ev.f2;
  return ev;
}

}  // namespace

PolicyEvaluation evaluate_policy(const PolicyPattern& policy, const PatternCounts& counts,
                                 const SuccessRateTable& table, const TaskTimes& times) {
  times.validate();
  const Extremes e = extremes(counts, table, times);
  if (e.placements == 0.0) throw InvalidInput("no placements to evaluate");
  double successes = 0.0;
  double time = 0.0;
  for (const auto& [cp, n] : counts) {
    if (n == 0) continue;
    const double count = static_cast<double>(n);
    const Task task = assign_task(policy, cp);
    successes += count * (task == Task::pick_and_toss ? table.rate(cp) : 1.0);
    time += count * task_time(task, times);
  }
  return finish(policy.index, successes, time, e);
}

PolicyEvaluation evaluate_policy(const PolicyPattern& policy, const std::vector<Workspace>& envs,
                                 const SuccessRateTable& table, const TaskTimes& times) {
  return evaluate_policy(policy, count_placements(envs), table, times);
}

PolicyEvaluation monte_carlo_evaluate(const PolicyPattern& policy,
                                      const std::vector<Workspace>& envs,
                                      const SuccessRateTable& table, const TaskTimes& times,
                                      int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("trials must be positive");
  times.validate();
  const PatternCounts counts = count_placements(envs);
  const Extremes e = extremes(counts, table, times);
  Rng rng(derive_seed(seed, "policy.monte_carlo"));
  long hits = 0;
  double time = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (const auto& ws : envs) {
      for (const auto& cp : placement_sequence(ws)) {
        const Task task = assign_task(policy, cp);
        const double u = uniform01(rng);
        if (task == Task::pick_and_place || u < table.rate(cp)) ++hits;
        if (t == 0) time += task_time(task, times);
      }
    }
  }
  return finish(policy.index, static_cast<double>(hits) / trials, time, e);
}

SearchResult brute_force_search(const std::vector<Workspace>& envs, const SuccessRateTable& table,
                                const TaskTimes& times, int jobs) {
  SearchResult result;
  result.groups = rank_cpatterns(table);
  result.policies = build_policy_patterns(result.groups);
  const PatternCounts counts = count_placements(envs, jobs);
  for (const auto& p : result.policies) {
    result.evaluations.push_back(evaluate_policy(p, counts, table, times));
  }
  for (std::size_t k = 1; k < result.evaluations.size(); ++k) {
    if (result.evaluations[k].objective > result.evaluations[static_cast<std::size_t>(result.best)].objective) {
      result.best = static_cast<int>(k);
    }
  }
  return result;
}

std::string policy_report_csv(const std::vector<PolicyEvaluation>& evaluations) {
  std::string out = "policy,f1,f2,objective\n";
  for (const auto& ev : evaluations) {
    out += fmt::format("P{},{:.6f},{:.6f},{:.6f}\n", ev.policy, ev.f1, ev.f2, ev.objective);
  }
  return out;
}

bool toss_succeeded(const TossOutcome& outcome, double gap) {
  return outcome.release_success && !outcome.collided && outcome.theta_roll == 0.0 &&
         outcome.d_x <= gap && outcome.d_y <= gap;
}

SuccessRateTable estimate_table_from_sim(const QFunction& q, const TossSetup& setup,
                                         const BoxObject& object,
                                         const std::vector<Workspace>& envs, int trials,
                                         std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("trials must be positive");
  if (envs.empty()) throw InvalidInput("environment list is empty");
  object.validate();
  SuccessRateTable table({}, RateSource::simulated);
  for (const auto& cp : enumerate_cpatterns()) {
    std::vector<std::pair<std::size_t, GridCell>> sites;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      for (const auto& cell : envs[i].empty_cells()) {
        if (try_classify_cpattern(envs[i], cell) == cp) sites.emplace_back(i, cell);
      }
    }
    if (sites.empty()) throw MissingPatternError("no environment shows " + cp.label());
    Rng rng(derive_seed(seed, "policy.estimate." + cp.label()));
    int successes = 0;
    for (int t = 0; t < trials; ++t) {
      const auto& [env_index, cell] = sites[static_cast<std::size_t>(t) % sites.size()];
      const Workspace& ws = envs[env_index];
      const GraspState grasp = sample_grasp(object, rng);
      const TossOutcome outcome =
          simulate_toss(setup, q.greedy(grasp), grasp, ws, make_slot(ws, cell), object);
      if (toss_succeeded(outcome, ws.gap())) ++successes;
    }
    table.set(cp, static_cast<double>(successes) / trials);
  }
  return table;
}

BoxObject transfer_similar_object(const BoxObject& unknown, const std::vector<BoxObject>& catalog) {
  if (catalog.empty()) throw InvalidInput("catalog is empty");
  const BoxObject* best = nullptr;
  double best_sse = 0.0;
  for (const auto& candidate : catalog) {
    if (!candidate.trained || candidate.category != unknown.category) continue;
    const double dw = candidate.width - unknown.width;
    const double dd = candidate.depth - unknown.depth;
    const double dh = candidate.height - unknown.height;
    const double sse = dw * dw + dd * dd + dh * dh;
    if (!best || sse < best_sse) {
      best = &candidate;
      best_sse = sse;
    }
  }
  if (!best) throw NoMatchError("no trained catalog object in category '" + unknown.category + "'");
  return *best;
}

}  // namespace tossing
