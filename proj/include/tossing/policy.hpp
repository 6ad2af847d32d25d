#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tossing/domain.hpp"
#include "tossing/flight.hpp"
#include "tossing/learner.hpp"

namespace tossing {

enum class RateSource { builtin, simulated, file };

std::string to_string(RateSource source);

/// PT success probability per contact pattern.
class SuccessRateTable {
public:
  SuccessRateTable() = default;
  SuccessRateTable(std::map<CPattern, double> rates, RateSource source);

  /// Measured rates for eleven patterns; C5F3M2 was never measured and takes
  /// `c5f3m2`.
  static SuccessRateTable builtin(double c5f3m2 = 0.60);

  /// Throws MissingPatternError when the pattern has no entry.
  double rate(const CPattern& cp) const;
  void set(const CPattern& cp, double rate);

  bool complete() const;
  /// All twelve patterns present and every rate in [0, 1].
  void validate() const;

  const std::map<CPattern, double>& rates() const { return rates_; }
  RateSource source() const { return source_; }

private:
  std::map<CPattern, double> rates_;
  RateSource source_ = RateSource::file;
};

/// `n_contacts,n_fixed,rate`, patterns in (n_fixed, n_contacts) order.
std::string success_table_csv(const SuccessRateTable& table);
/// Throws ConfigError with the line number on malformed rows.
SuccessRateTable parse_success_table_csv(const std::string& text,
                                         const std::string& source_name = "<table>");

struct RankGroup {
  double rate = 0.0;
  std::vector<CPattern> patterns;
};

/// Patterns grouped by identical rate, highest rate first.
std::vector<RankGroup> rank_cpatterns(const SuccessRateTable& table);

struct PolicyPattern {
  int index = 0;
  std::vector<int> pt_groups;        // indices into the ranking
  std::vector<CPattern> pt_patterns; // sorted
  bool nine_group_ranking = true;    // false when the ranking has other than 9 groups
};

/// Policy k tosses into the k best groups. Yields groups.size() + 1 policies.
std::vector<PolicyPattern> build_policy_patterns(const std::vector<RankGroup>& groups);

Task assign_task(const PolicyPattern& policy, const CPattern& cp);

/// How often each pattern is met when every environment is filled in
/// row-major order. Integer counts, so the total does not depend on the
/// order of the environments.
using PatternCounts = std::map<CPattern, long>;

PatternCounts count_placements(const std::vector<Workspace>& envs, int jobs = 1);
std::vector<CPattern> placement_sequence(const Workspace& ws);

struct PolicyEvaluation {
  int policy = 0;
  double f1 = 0.0;         // accuracy scaled between the all-PT (0) and all-PP (1) values
  double f2 = 0.0;         // time saving scaled between all-PP (0) and all-PT (1)
  double objective = 0.0;  // f1 + f2
  double accuracy = 0.0;   // expected fraction of successful placements
  double total_time = 0.0; // seconds over every placement
};

PolicyEvaluation evaluate_policy(const PolicyPattern& policy, const PatternCounts& counts,
                                 const SuccessRateTable& table, const TaskTimes& times);
PolicyEvaluation evaluate_policy(const PolicyPattern& policy, const std::vector<Workspace>& envs,
                                 const SuccessRateTable& table, const TaskTimes& times);

/// Sampled counterpart of evaluate_policy: each toss succeeds with its
/// table rate. Same normalization; used to cross-check the closed form.
PolicyEvaluation monte_carlo_evaluate(const PolicyPattern& policy,
                                      const std::vector<Workspace>& envs,
                                      const SuccessRateTable& table, const TaskTimes& times,
                                      int trials, std::uint64_t seed);

struct SearchResult {
  std::vector<RankGroup> groups;
  std::vector<PolicyPattern> policies;
  std::vector<PolicyEvaluation> evaluations;
  int best = 0;  // argmax of the objective, ties to the lower index
};

SearchResult brute_force_search(const std::vector<Workspace>& envs, const SuccessRateTable& table,
                                const TaskTimes& times, int jobs = 1);

/// `policy,f1,f2,objective`.
std::string policy_report_csv(const std::vector<PolicyEvaluation>& evaluations);

/// True when a toss ended in the slot: released cleanly, no contact with
/// walls or objects, upright, and within `gap` of the target on both axes.
bool toss_succeeded(const TossOutcome& outcome, double gap);

/// Greedy tosses of `object` into slots showing each pattern, `trials` per
/// pattern, cycling over every (environment, slot) pair with that pattern.
/// Grasp states are drawn from a stream seeded by `seed` and the pattern.
SuccessRateTable estimate_table_from_sim(const QFunction& q, const TossSetup& setup,
                                         const BoxObject& object,
                                         const std::vector<Workspace>& envs, int trials,
                                         std::uint64_t seed);

/// Trained, same-category catalog entry with the smallest squared error over
/// the three sides; ties go to the earlier entry.
BoxObject transfer_similar_object(const BoxObject& unknown, const std::vector<BoxObject>& catalog);

}  // namespace tossing
