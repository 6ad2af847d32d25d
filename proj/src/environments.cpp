#include "tossing/environments.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "tossing/errors.hpp"
#include "tossing/random.hpp"

namespace tossing {

namespace {

constexpr int kAttemptsPerPattern = 20000;
constexpr int kAttemptsPerEnvironment = 2000;

Workspace random_configuration(const Workspace& tmpl, Rng& rng) {
  const auto walls = WallSet::from_bits(static_cast<std::uint8_t>(rng() & tmpl.walls().bits()));
  const std::size_t slots = static_cast<std::size_t>(tmpl.slot_count());
  const std::size_t occupied = uniform_index(rng, slots);  // leaves at least one empty
  std::vector<std::size_t> order(slots);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < occupied; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, slots - i)]);
  }
  std::vector<bool> occupancy(slots, false);
  for (std::size_t i = 0; i < occupied; ++i) occupancy[order[i]] = true;
  return Workspace(tmpl.rows(), tmpl.cols(), tmpl.cell_pitch(), tmpl.gap(), walls,
                   tmpl.floor_height(), std::move(occupancy));
}

std::optional<std::vector<CPattern>> valid_signature(const Workspace& ws) {
  std::vector<CPattern> sig;
  for (GridCell cell : ws.empty_cells()) {
    auto p = try_classify_cpattern(ws, cell);
    if (!p) return std::nullopt;
    sig.push_back(*p);
  }
  std::sort(sig.begin(), sig.end());
  return sig;
}

}  // namespace

std::vector<CPattern> pattern_signature(const Workspace& ws) {
  std::vector<CPattern> sig;
  for (GridCell cell : ws.empty_cells()) sig.push_back(classify_cpattern(ws, cell));
  std::sort(sig.begin(), sig.end());
  return sig;
}

std::vector<Workspace> generate_environments(const Workspace& ws_template, int count,
                                             std::uint64_t seed) {
  const auto all_patterns = enumerate_cpatterns();
  if (count < static_cast<int>(all_patterns.size())) {
    throw CoverageError(fmt::format("{} environments cannot cover all {} contact patterns", count,
                                    all_patterns.size()));
  }

  Rng rng(derive_seed(seed, "environments"));
  std::vector<Workspace> envs;
  std::set<std::vector<CPattern>> seen;
  std::set<CPattern> covered;

  auto accept = [&](Workspace ws, std::vector<CPattern> sig) {
    covered.insert(sig.begin(), sig.end());
    seen.insert(std::move(sig));
    envs.push_back(std::move(ws));
  };

  for (const CPattern& wanted : all_patterns) {
    if (covered.contains(wanted)) continue;
    bool found = false;
    for (int attempt = 0; attempt < kAttemptsPerPattern && !found; ++attempt) {
      Workspace ws = random_configuration(ws_template, rng);
      auto sig = valid_signature(ws);
      if (!sig || seen.contains(*sig)) continue;
      if (std::find(sig->begin(), sig->end(), wanted) == sig->end()) continue;
      accept(std::move(ws), std::move(*sig));
      found = true;
    }
    if (!found) {
      throw CoverageError(fmt::format("no {}x{} configuration with walls within {{{}}} exhibits {}",
                                      ws_template.rows(), ws_template.cols(),
                                      ws_template.walls().to_string(), wanted.label()));
    }
  }
  if (static_cast<int>(envs.size()) > count) {
    throw CoverageError(fmt::format("covering all patterns took {} environments, more than {}",
                                    envs.size(), count));
  }

  const long budget = static_cast<long>(count) * kAttemptsPerEnvironment;
  for (long attempt = 0; attempt < budget && static_cast<int>(envs.size()) < count; ++attempt) {
    Workspace ws = random_configuration(ws_template, rng);
    auto sig = valid_signature(ws);
    if (!sig || seen.contains(*sig)) continue;
    accept(std::move(ws), std::move(*sig));
  }
  if (static_cast<int>(envs.size()) < count) {
    throw CoverageError(fmt::format("only {} distinct environments found, {} requested",
                                    envs.size(), count));
  }
  return envs;
}

}  // namespace tossing
