#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tossing/environments.hpp"
#include "tossing/errors.hpp"
#include "tossing/policy.hpp"

using namespace tossing;

namespace {

CPattern cp(const char* label) { return *CPattern::parse(label); }

Workspace template_ws() { return Workspace(4, 5, 0.143, 0.01, WallSet::all(), 0.0); }

const std::vector<Workspace>& envs48() {
  static const std::vector<Workspace> envs = generate_environments(template_ws(), 48, 2024);
  return envs;
}

SearchResult builtin_search() {
  return brute_force_search(envs48(), SuccessRateTable::builtin(), TaskTimes{});
}

}  // namespace

TEST(Ranking, BuiltinTableHasNineGroups) {
  const auto groups = rank_cpatterns(SuccessRateTable::builtin());
  ASSERT_EQ(groups.size(), 9u);
  EXPECT_EQ(groups.front().rate, 1.0);
  std::vector<CPattern> top = groups.front().patterns;
  std::sort(top.begin(), top.end());
  std::vector<CPattern> expect{cp("C1F1M0"), cp("C2F2M0"), cp("C3F3M0")};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(top, expect);
  EXPECT_EQ(groups.back().patterns, std::vector<CPattern>{cp("C5F1M4")});
  EXPECT_EQ(groups.back().rate, 0.0);
  for (std::size_t i = 1; i < groups.size(); ++i) EXPECT_GT(groups[i - 1].rate, groups[i].rate);
  std::size_t total = 0;
  for (const auto& g : groups) total += g.patterns.size();
  EXPECT_EQ(total, 12u);
}

TEST(Ranking, ExactTiesShareAGroup) {
  const auto groups = rank_cpatterns(SuccessRateTable::builtin());
  const auto group_of = [&](const CPattern& p) {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto& ps = groups[i].patterns;
      if (std::find(ps.begin(), ps.end(), p) != ps.end()) return i;
    }
    return groups.size();
  };
  EXPECT_EQ(group_of(cp("C2F1M1")), group_of(cp("C4F3M1")));
  EXPECT_LT(group_of(cp("C3F2M1")), group_of(cp("C2F1M1")));
}

TEST(Ranking, EqualRatesCollapse) {
  std::map<CPattern, double> rates;
  for (const auto& p : enumerate_cpatterns()) rates[p] = 0.5;
  const auto groups = rank_cpatterns(SuccessRateTable(rates, RateSource::file));
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(build_policy_patterns(groups).size(), 2u);
  EXPECT_FALSE(build_policy_patterns(groups)[1].nine_group_ranking);
}

TEST(Ranking, IncompleteTableRejected) {
  SuccessRateTable t;
  t.set(cp("C1F1M0"), 1.0);
  EXPECT_THROW(rank_cpatterns(t), MissingPatternError);
  EXPECT_THROW(t.rate(cp("C2F1M1")), MissingPatternError);
  EXPECT_THROW(t.set(cp("C2F1M1"), 1.2), InvalidInput);
}

TEST(Policies, TenNestedPolicies) {
  const auto policies = build_policy_patterns(rank_cpatterns(SuccessRateTable::builtin()));
  ASSERT_EQ(policies.size(), 10u);
  EXPECT_TRUE(policies[0].pt_patterns.empty());
  EXPECT_EQ(policies[9].pt_patterns.size(), 12u);
  for (std::size_t k = 1; k < policies.size(); ++k) {
    EXPECT_EQ(policies[k].index, static_cast<int>(k));
    EXPECT_TRUE(std::includes(policies[k].pt_patterns.begin(), policies[k].pt_patterns.end(),
                              policies[k - 1].pt_patterns.begin(), policies[k - 1].pt_patterns.end()));
    EXPECT_GT(policies[k].pt_patterns.size(), policies[k - 1].pt_patterns.size());
    EXPECT_TRUE(std::is_sorted(policies[k].pt_patterns.begin(), policies[k].pt_patterns.end()));
  }
  const auto& p6 = policies[6].pt_patterns;
  EXPECT_NE(std::find(p6.begin(), p6.end(), cp("C5F3M2")), p6.end());
  const auto& p4 = policies[4].pt_patterns;
  EXPECT_EQ(std::find(p4.begin(), p4.end(), cp("C5F3M2")), p4.end());
}

TEST(Policies, AssignTask) {
  const auto policies = build_policy_patterns(rank_cpatterns(SuccessRateTable::builtin()));
  EXPECT_EQ(assign_task(policies[0], cp("C1F1M0")), Task::pick_and_place);
  EXPECT_EQ(assign_task(policies[1], cp("C1F1M0")), Task::pick_and_toss);
  EXPECT_EQ(assign_task(policies[1], cp("C2F1M1")), Task::pick_and_place);
  EXPECT_EQ(assign_task(policies[9], cp("C5F1M4")), Task::pick_and_toss);
  EXPECT_EQ(assign_task(policies[8], cp("C5F1M4")), Task::pick_and_place);
  // Once a pattern is tossed it stays tossed in every larger policy.
  for (const auto& p : enumerate_cpatterns()) {
    bool tossed = false;
    for (const auto& policy : policies) {
      const bool now = assign_task(policy, p) == Task::pick_and_toss;
      EXPECT_TRUE(now || !tossed);
      tossed = now;
    }
    EXPECT_TRUE(tossed);
  }
}

TEST(Placement, SequenceMatchesMapOracle) {
  for (const auto& env : envs48()) {
    const auto seq = placement_sequence(env);
    Workspace ws = env;
    std::size_t i = 0;
    for (int r = 0; r < ws.rows(); ++r) {
      for (int c = 0; c < ws.cols(); ++c) {
        if (ws.occupied(r, c)) continue;
        const auto [fixed, movable] = oracle::ContactMap(ws).count(r, c);
        ASSERT_LT(i, seq.size());
        EXPECT_EQ(seq[i++], *CPattern::make(fixed, movable));
        ws = ws.with_occupied({r, c});
      }
    }
    EXPECT_EQ(i, seq.size());
  }
}

TEST(Evaluation, MatchesDirectOracle) {
  const SuccessRateTable table = SuccessRateTable::builtin();
  const TaskTimes times;
  const auto result = builtin_search();
  for (const auto& policy : result.policies) {
    const oracle::Direct d = oracle::direct_score(policy, envs48(), table, times);
    const auto& ev = result.evaluations[static_cast<std::size_t>(policy.index)];
    const double f1 = d.f1();
    const double f2 = d.f2();
    EXPECT_NEAR(ev.f1, f1, 1e-9);
    EXPECT_NEAR(ev.f2, f2, 1e-9);
    EXPECT_NEAR(ev.objective, f1 + f2, 1e-9);
    EXPECT_NEAR(ev.accuracy, d.success / static_cast<double>(d.n), 1e-9);
    EXPECT_NEAR(ev.total_time, d.time, 1e-6);
  }
}

TEST(Evaluation, Endpoints) {
  const auto result = builtin_search();
  EXPECT_DOUBLE_EQ(result.evaluations.front().f1, 1.0);
  EXPECT_DOUBLE_EQ(result.evaluations.front().f2, 0.0);
  EXPECT_DOUBLE_EQ(result.evaluations.front().accuracy, 1.0);
  EXPECT_DOUBLE_EQ(result.evaluations.back().f1, 0.0);
  EXPECT_DOUBLE_EQ(result.evaluations.back().f2, 1.0);
}

TEST(Evaluation, SingleFreeSlotAllToss) {
  const Workspace one(1, 1, 0.143, 0.01, WallSet{}, 0.0);
  const auto policies = build_policy_patterns(rank_cpatterns(SuccessRateTable::builtin()));
  const auto ev = evaluate_policy(policies.back(), std::vector<Workspace>{one},
                                  SuccessRateTable::builtin(), TaskTimes{});
  EXPECT_EQ(ev.f1, 1.0);
  EXPECT_EQ(ev.f2, 1.0);
  EXPECT_EQ(ev.total_time, 9.5);
}

TEST(Evaluation, MonotoneInPolicyIndex) {
  const auto result = builtin_search();
  for (std::size_t k = 1; k < result.evaluations.size(); ++k) {
    EXPECT_LE(result.evaluations[k].f1, result.evaluations[k - 1].f1 + 1e-12);
    EXPECT_GE(result.evaluations[k].f2, result.evaluations[k - 1].f2 - 1e-12);
    EXPECT_LE(result.evaluations[k].total_time, result.evaluations[k - 1].total_time);
  }
}

TEST(Evaluation, OrderAndThreadInvariant) {
  const auto base = builtin_search();
  std::vector<Workspace> shuffled = envs48();
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 17, shuffled.end());
  const auto perm = brute_force_search(shuffled, SuccessRateTable::builtin(), TaskTimes{});
  const auto threaded = brute_force_search(envs48(), SuccessRateTable::builtin(), TaskTimes{}, 3);
  EXPECT_EQ(policy_report_csv(perm.evaluations), policy_report_csv(base.evaluations));
  EXPECT_EQ(policy_report_csv(threaded.evaluations), policy_report_csv(base.evaluations));
  for (std::size_t k = 0; k < base.evaluations.size(); ++k) {
    EXPECT_EQ(perm.evaluations[k].objective, base.evaluations[k].objective);
    EXPECT_EQ(threaded.evaluations[k].objective, base.evaluations[k].objective);
  }
  EXPECT_EQ(perm.best, base.best);
  EXPECT_EQ(count_placements(shuffled), count_placements(envs48(), 4));
}

TEST(Evaluation, BestIsArgmaxWithLowTies) {
  const auto result = builtin_search();
  for (std::size_t k = 0; k < result.evaluations.size(); ++k) {
    const double obj = result.evaluations[k].objective;
    const double best = result.evaluations[static_cast<std::size_t>(result.best)].objective;
    if (static_cast<int>(k) < result.best) EXPECT_LT(obj, best);
    else EXPECT_LE(obj, best);
  }
  EXPECT_GT(result.best, 0);
  EXPECT_LT(result.best, 9);
}

TEST(Evaluation, PerfectTossingPrefersAllToss) {
  std::map<CPattern, double> rates;
  for (const auto& p : enumerate_cpatterns()) rates[p] = 1.0;
  const auto result = brute_force_search(envs48(), SuccessRateTable(rates, RateSource::file), TaskTimes{});
  EXPECT_EQ(result.best, static_cast<int>(result.policies.size()) - 1);
}

TEST(Evaluation, MonteCarloAgreesWithClosedForm) {
  const SuccessRateTable table = SuccessRateTable::builtin();
  const auto result = builtin_search();
  for (int k : {0, 3, 5, 9}) {
    const auto& policy = result.policies[static_cast<std::size_t>(k)];
    const auto mc = monte_carlo_evaluate(policy, envs48(), table, TaskTimes{}, 300, 17);
    const auto& cf = result.evaluations[static_cast<std::size_t>(k)];
    EXPECT_NEAR(mc.accuracy, cf.accuracy, 0.01) << "P" << k;
    EXPECT_NEAR(mc.f1, cf.f1, 0.03) << "P" << k;
    EXPECT_DOUBLE_EQ(mc.f2, cf.f2);
  }
  EXPECT_THROW(monte_carlo_evaluate(result.policies[1], envs48(), table, TaskTimes{}, 0, 1), InvalidInput);
}

TEST(Evaluation, RejectsBadInput) {
  EXPECT_THROW(count_placements({}), InvalidInput);
  EXPECT_THROW(count_placements(envs48(), 0), InvalidInput);
}

TEST(SuccessTable, CsvRoundTrip) {
  const SuccessRateTable table = SuccessRateTable::builtin(0.6);
  const std::string csv = success_table_csv(table);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n_contacts,n_fixed,rate");
  const SuccessRateTable back = parse_success_table_csv(csv);
  EXPECT_EQ(back.rates(), table.rates());
  EXPECT_EQ(back.source(), RateSource::file);
  EXPECT_EQ(table.rate(cp("C5F3M2")), 0.6);
  EXPECT_EQ(SuccessRateTable::builtin(0.7).rate(cp("C5F3M2")), 0.7);
}

TEST(SuccessTable, ParseErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      parse_success_table_csv(text, "t.csv");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("contacts,fixed,rate\n").find("t.csv:1"), std::string::npos);
  EXPECT_NE(message("n_contacts,n_fixed,rate\n1,1,1.0\n2,x,0.5\n").find("t.csv:3"), std::string::npos);
  EXPECT_NE(message("n_contacts,n_fixed,rate\n\n6,1,0.5\n").find("t.csv:3"), std::string::npos);
  EXPECT_NE(message("n_contacts,n_fixed,rate\n1,1,1.5\n").find("t.csv:2"), std::string::npos);
  EXPECT_NE(message("n_contacts,n_fixed,rate\n1,1,1\n1,1,1\n").find("duplicate"), std::string::npos);
}

TEST(Transfer, SquaredErrorOracle) {
  const auto catalog = default_catalog();
  const auto find = [&](const std::string& id) {
    return *std::find_if(catalog.begin(), catalog.end(), [&](const BoxObject& b) { return b.id == id; });
  };
  const auto mm_sse = [](const BoxObject& a, const BoxObject& b) {
    return oracle::sse(a.width * 1e3, a.depth * 1e3, a.height * 1e3, b.width * 1e3, b.depth * 1e3,
                       b.height * 1e3);
  };
  const BoxObject u1 = find("U1");
  EXPECT_NEAR(mm_sse(u1, find("O1")), 1068.0, 1e-6);
  EXPECT_NEAR(mm_sse(u1, find("O2")), 5778.0, 1e-6);
  EXPECT_NEAR(mm_sse(u1, find("O3")), 3731.0, 1e-6);
  EXPECT_NEAR(mm_sse(find("U2"), find("O2")), 593.0, 1e-6);
  EXPECT_NEAR(mm_sse(find("U3"), find("O3")), 4922.0, 1e-6);

  EXPECT_EQ(transfer_similar_object(u1, catalog).id, "O1");
  EXPECT_EQ(transfer_similar_object(find("U2"), catalog).id, "O2");
  EXPECT_EQ(transfer_similar_object(find("U3"), catalog).id, "O3");
  EXPECT_EQ(transfer_similar_object(find("O2"), catalog).id, "O2");
}

TEST(Transfer, CategoryAndErrors) {
  const auto catalog = default_catalog();
  BoxObject bottle{"B1", 0.06, 0.06, 0.2, "bottle", false};
  EXPECT_THROW(transfer_similar_object(bottle, catalog), NoMatchError);
  EXPECT_THROW(transfer_similar_object(bottle, {}), InvalidInput);
  // Equal distance: the earlier entry wins.
  std::vector<BoxObject> twins{{"A", 0.10, 0.05, 0.10, "box", true}, {"B", 0.10, 0.05, 0.10, "box", true}};
  EXPECT_EQ(transfer_similar_object({"X", 0.11, 0.05, 0.10, "box", false}, twins).id, "A");
}

TEST(Simulation, TossSuccessRule) {
  TossOutcome o;
  EXPECT_TRUE(toss_succeeded(o, 0.01));
  o.d_x = 0.011;
  EXPECT_FALSE(toss_succeeded(o, 0.01));
  o = {};
  o.theta_roll = 90.0;
  EXPECT_FALSE(toss_succeeded(o, 0.01));
  o = {};
  o.collided = true;
  EXPECT_FALSE(toss_succeeded(o, 0.01));
  o = {};
  o.release_success = false;
  EXPECT_FALSE(toss_succeeded(o, 0.01));
}

TEST(Simulation, EstimatedTableIsDeterministic) {
  TrainConfig cfg;
  cfg.hidden = {16};
  const QFunction q = initial_qfunction(ActionGrid::desk_default(), cfg);
  const TossSetup setup;
  const BoxObject box = default_catalog().front();
  const auto a = estimate_table_from_sim(q, setup, box, envs48(), 3, 9);
  const auto b = estimate_table_from_sim(q, setup, box, envs48(), 3, 9);
  EXPECT_EQ(a.rates(), b.rates());
  EXPECT_EQ(a.source(), RateSource::simulated);
  EXPECT_NO_THROW(a.validate());
  for (const auto& [p, r] : a.rates()) EXPECT_EQ(std::fmod(r * 3.0, 1.0) < 1e-9 || std::fmod(r * 3.0, 1.0) > 1 - 1e-9, true) << p.label();
  EXPECT_THROW(estimate_table_from_sim(q, setup, box, envs48(), 0, 9), InvalidInput);
  EXPECT_THROW(estimate_table_from_sim(q, setup, box, {template_ws()}, 2, 9), MissingPatternError);
}
