#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tossing/flight.hpp"
#include "tossing/kinematics.hpp"
#include "tossing/network.hpp"
#include "tossing/random.hpp"
#include "tossing/reward.hpp"

namespace tossing {

using QNet = FactorizedQNet<float>;

/// Q-function over the four grasp features with one output head per action
/// factor.
class QFunction {
public:
  static constexpr int kStateDim = 4;

  explicit QFunction(const std::array<int, 6>& head_widths,
                     std::vector<int> hidden = {256, 256});
  explicit QFunction(QNet net);

  static Eigen::VectorXf encode(const GraspState& state);

  /// Concatenated head outputs.
  Eigen::VectorXf values(const GraspState& state) const;
  /// Per-head argmax, ties toward the lowest index.
  TossAction greedy(const GraspState& state) const;

  std::array<int, 6> head_widths() const;
  QNet& net() { return net_; }
  const QNet& net() const { return net_; }

private:
  QNet net_;
};

/// Argmax of each head; ties go to the lowest index.
TossAction per_head_argmax(const QNet& net, const Eigen::VectorXf& outputs);

struct Transition {
  GraspState state;
  TossAction action;
  double reward = 0.0;
  bool terminal = true;
};

/// Fixed-capacity store; the oldest transition is evicted first.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  /// Uniform draw with replacement.
  std::vector<std::size_t> sample_indices(Rng& rng, std::size_t count) const;

private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct TrainConfig {
  int episodes = 1000;
  int steps_per_episode = 30;
  double epsilon_start = 0.95;
  double epsilon_end = 0.05;
  double gamma = 0.8;
  double learning_rate = 0.001;
  int batch_size = 64;
  std::uint64_t seed = 0;
  int warm_start_episodes = 100;
  int replay_capacity = 10000;
  std::vector<int> hidden{256, 256};

  void validate() const;
};

/// Linear decay from epsilon_start at episode 0 to epsilon_end at the last
/// episode.
double epsilon_schedule(int episode, const TrainConfig& cfg);

/// Draws a uniform action and a uniform number on every call, so the random
/// stream does not depend on the network.
TossAction epsilon_greedy_select(const QFunction& q, const GraspState& s, double epsilon, Rng& rng);
TossAction epsilon_greedy_select(const QFunction& q, const GraspState& s, double epsilon,
                                 std::uint64_t rng_seed);

TossAction random_action(const std::array<int, 6>& widths, Rng& rng);

/// One SGD update on a uniform minibatch. Every toss is terminal, so the
/// regression target is the observed reward. Returns the loss before the
/// update, or nullopt while the buffer holds fewer than batch_size entries.
std::optional<double> train_step(QFunction& q, const ReplayBuffer& buffer, const TrainConfig& cfg,
                                 Rng& rng);

/// Grasp state drawn uniformly: positions in [0.2, 0.8], angle in
/// [-30, 30] deg, opening in (object depth, max opening].
GraspState sample_grasp(const BoxObject& object, Rng& rng);

struct EpisodeLog {
  int episode = 0;
  double total_reward = 0.0;
  double mean_reward = 0.0;  // running mean of total_reward
  double epsilon = 0.0;
  double loss = 0.0;         // mean over the episode's updates, 0 before the first
  int release_failures = 0;
};

struct TrainingResult {
  std::vector<EpisodeLog> log;
  QFunction q;
};

/// Network initialized from the config seed.
QFunction initial_qfunction(const ActionGrid& grid, const TrainConfig& cfg);

/// Main self-supervised loop toward the first empty slot of `target_env`.
/// Starts from `initial` when given, otherwise from initial_qfunction.
TrainingResult run_training(const TossSetup& setup, const RewardConfig& reward,
                            const TrainConfig& cfg, const BoxObject& object,
                            const Workspace& target_env,
                            std::optional<QFunction> initial = std::nullopt);

/// Reward used for pretraining: -1 for touching walls or placed objects plus
/// the release term.
double warm_start_reward(const TossOutcome& outcome);

/// Pretrains for warm_start_episodes with warm_start_reward.
QFunction warm_start(const TossSetup& setup, const TrainConfig& cfg, const BoxObject& object,
                     const Workspace& target_env);

std::string training_log_csv(const std::vector<EpisodeLog>& log);

}  // namespace tossing
