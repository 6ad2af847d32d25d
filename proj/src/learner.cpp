#include "tossing/learner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "tossing/errors.hpp"

namespace tossing {

namespace {

std::vector<int> widths_vector(const std::array<int, 6>& widths) {
  return {widths.begin(), widths.end()};
}

}  // namespace

QFunction::QFunction(const std::array<int, 6>& head_widths, std::vector<int> hidden)
    : net_(kStateDim, std::move(hidden), widths_vector(head_widths)) {}

QFunction::QFunction(QNet net) : net_(std::move(net)) {
  if (net_.input_dim() != kStateDim || net_.head_count() != 6) {
    throw InvalidInput("Q-function needs 4 inputs and 6 heads");
  }
}

Eigen::VectorXf QFunction::encode(const GraspState& s) {
  Eigen::VectorXf x(kStateDim);
  x << static_cast<float>(2.0 * s.grasp_x - 1.0), static_cast<float>(2.0 * s.grasp_z - 1.0),
      static_cast<float>(s.gripper_angle / (M_PI / 6.0)),
      static_cast<float>(s.gripper_opening / (GraspState::kMaxOpening / 2.0) - 1.0);
  return x;
}

Eigen::VectorXf QFunction::values(const GraspState& state) const {
  return net_.forward(Eigen::VectorXf(encode(state)));
}

TossAction per_head_argmax(const QNet& net, const Eigen::VectorXf& outputs) {
  TossAction a;
  for (std::size_t h = 0; h < net.head_count(); ++h) {
    const int offset = net.head_offset(h);
    int best = 0;
    for (int i = 1; i < net.head_widths()[h]; ++i) {
      if (outputs(offset + i) > outputs(offset + best)) best = i;
    }
    a.index[h] = best;
  }
  return a;
}

TossAction QFunction::greedy(const GraspState& state) const {
  return per_head_argmax(net_, values(state));
}

std::array<int, 6> QFunction::head_widths() const {
  std::array<int, 6> out{};
  std::copy_n(net_.head_widths().begin(), 6, out.begin());
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(t);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(Rng& rng, std::size_t count) const {
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = uniform_index(rng, items_.size());
  return idx;
}

void TrainConfig::validate() const {
  if (episodes < 1 || steps_per_episode < 1 || batch_size < 1 || replay_capacity < 1) {
    throw InvalidInput("training counts must be positive");
  }
  if (warm_start_episodes < 0) throw InvalidInput("warm_start_episodes must be non-negative");
  if (!(0.0 <= epsilon_end && epsilon_end <= epsilon_start && epsilon_start <= 1.0)) {
    throw InvalidInput("need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
  for (int h : hidden) {
    if (h < 1) throw InvalidInput("hidden widths must be positive");
  }
}

double epsilon_schedule(int episode, const TrainConfig& cfg) {
  if (episode < 0 || episode >= cfg.episodes) {
    throw InvalidInput(fmt::format("episode {} outside [0, {})", episode, cfg.episodes));
  }
  if (cfg.episodes == 1) return cfg.epsilon_start;
  const double frac = static_cast<double>(episode) / static_cast<double>(cfg.episodes - 1);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

TossAction random_action(const std::array<int, 6>& widths, Rng& rng) {
  TossAction a;
  for (std::size_t k = 0; k < 6; ++k) {
    a.index[k] = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(widths[k])));
  }
  return a;
}

TossAction epsilon_greedy_select(const QFunction& q, const GraspState& s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("epsilon must lie in [0, 1]");
  const double u = uniform01(rng);
  const TossAction explore = random_action(q.head_widths(), rng);
  return u < epsilon ? explore : q.greedy(s);
}

TossAction epsilon_greedy_select(const QFunction& q, const GraspState& s, double epsilon,
                                 std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return epsilon_greedy_select(q, s, epsilon, rng);
}

std::optional<double> train_step(QFunction& q, const ReplayBuffer& buffer, const TrainConfig& cfg,
                                 Rng& rng) {
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  if (buffer.size() < batch) return std::nullopt;

  const auto picks = buffer.sample_indices(rng, batch);
  Eigen::MatrixXf x(QFunction::kStateDim, static_cast<Eigen::Index>(batch));
  Eigen::VectorXf targets(static_cast<Eigen::Index>(batch));
  std::vector<int> actions;
  actions.reserve(batch * 6);
  for (std::size_t b = 0; b < batch; ++b) {
    const Transition& t = buffer[picks[b]];
    x.col(static_cast<Eigen::Index>(b)) = QFunction::encode(t.state);
    // Terminal transitions: the discounted bootstrap term vanishes.
    const double bootstrap = 0.0;
    targets(static_cast<Eigen::Index>(b)) =
        static_cast<float>(t.reward + (t.terminal ? 0.0 : cfg.gamma * bootstrap));
    actions.insert(actions.end(), t.action.index.begin(), t.action.index.end());
  }

  QNet::Layers grad;
  const float loss = q.net().loss(x, actions, targets, &grad);
  q.net().sgd_step(grad, static_cast<float>(cfg.learning_rate));
  return static_cast<double>(loss);
}

GraspState sample_grasp(const BoxObject& object, Rng& rng) {
  constexpr double deg = M_PI / 180.0;
  GraspState g;
  g.grasp_x = uniform(rng, 0.2, 0.8);
  g.grasp_z = uniform(rng, 0.2, 0.8);
  g.gripper_angle = uniform(rng, -30.0 * deg, 30.0 * deg);
  const double lo = std::min(object.depth, GraspState::kMaxOpening);
  // (lo, max]: flip the half-open unit draw.
  g.gripper_opening = lo + (GraspState::kMaxOpening - lo) * (1.0 - uniform01(rng));
  return g;
}

QFunction initial_qfunction(const ActionGrid& grid, const TrainConfig& cfg) {
  QFunction q(grid.cardinalities(), cfg.hidden);
  q.net().init_uniform(derive_seed(cfg.seed, "learner.init"));
  return q;
}

namespace {

// Shared episode loop for pretraining and main training; `tag` separates the
// random streams of the two phases.
TrainingResult self_supervised_loop(const TossSetup& setup, const TrainConfig& cfg,
                                    const BoxObject& object, const Workspace& target_env,
                                    QFunction q, const std::string& tag,
                                    const std::function<double(const TossOutcome&)>& reward_of) {
  cfg.validate();
  setup.grid.validate();
  object.validate();
  if (q.head_widths() != setup.grid.cardinalities()) {
    throw InvalidInput("Q-function heads do not match the action grid");
  }
  const Slot target = select_placement_slot(target_env);

  Rng grasp_rng(derive_seed(cfg.seed, tag + ".grasp"));
  Rng explore_rng(derive_seed(cfg.seed, tag + ".explore"));
  Rng replay_rng(derive_seed(cfg.seed, tag + ".replay"));
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.replay_capacity));

  std::vector<EpisodeLog> log;
  log.reserve(static_cast<std::size_t>(cfg.episodes));
  double running = 0.0;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    EpisodeLog row;
    row.episode = episode;
    row.epsilon = epsilon_schedule(episode, cfg);
    const GraspState grasp = sample_grasp(object, grasp_rng);

    double loss_sum = 0.0;
    int updates = 0;
    for (int step = 0; step < cfg.steps_per_episode; ++step) {
      const TossAction action = epsilon_greedy_select(q, grasp, row.epsilon, explore_rng);
      const TossOutcome outcome = simulate_toss(setup, action, grasp, target_env, target, object);
      const double r = reward_of(outcome);
      row.total_reward += r;
      if (!outcome.release_success) ++row.release_failures;
      buffer.push({grasp, action, r, true});
      if (auto loss = train_step(q, buffer, cfg, replay_rng)) {
        loss_sum += *loss;
        ++updates;
      }
    }
    row.loss = updates > 0 ? loss_sum / updates : 0.0;
    running += row.total_reward;
    row.mean_reward = running / static_cast<double>(episode + 1);
    log.push_back(row);
  }
  return {std::move(log), std::move(q)};
}

}  // namespace

TrainingResult run_training(const TossSetup& setup, const RewardConfig& reward,
                            const TrainConfig& cfg, const BoxObject& object,
                            const Workspace& target_env, std::optional<QFunction> initial) {
  reward.validate();
  QFunction q = initial ? std::move(*initial) : initial_qfunction(setup.grid, cfg);
  return self_supervised_loop(setup, cfg, object, target_env, std::move(q), "learner.main",
                              [&](const TossOutcome& o) { return total_reward(o, reward); });
}

double warm_start_reward(const TossOutcome& outcome) {
  return (outcome.collided ? -1.0 : 0.0) + release_reward(outcome.release_success);
}

QFunction warm_start(const TossSetup& setup, const TrainConfig& cfg, const BoxObject& object,
                     const Workspace& target_env) {
  cfg.validate();
  QFunction q = initial_qfunction(setup.grid, cfg);
  if (cfg.warm_start_episodes == 0) return q;
  TrainConfig warm = cfg;
  warm.episodes = cfg.warm_start_episodes;
  return self_supervised_loop(setup, warm, object, target_env, std::move(q), "learner.warm",
                              warm_start_reward)
      .q;
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
  std::string out = "episode,total_reward,mean_reward,epsilon,loss\n";
  for (const auto& row : log) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", row.episode, row.total_reward,
                       row.mean_reward, row.epsilon, row.loss);
  }
  return out;
}

}  // namespace tossing
