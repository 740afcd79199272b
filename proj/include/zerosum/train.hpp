#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zerosum/game.hpp"
#include "zerosum/mcts.hpp"
#include "zerosum/net.hpp"
#include "zerosum/rng.hpp"

namespace zerosum::train {

// v_t = r_t + gamma * v_{t+1}, with v_{T+1} = bootstrap.
std::vector<double> compute_returns(std::span<const double> rewards, double gamma,
                                    double bootstrap = 0.0);

struct ReplayEntry {
  std::vector<double> x;
  MixedStrategy pi1;
  MixedStrategy pi2;
  double v1 = 0.0;

  // Zero-sum: player 2's return is the negation.
  double v2() const { return -v1; }
};

// Fixed-capacity circular buffer; once full each insert evicts the oldest.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void insert(ReplayEntry entry);
  void insert(std::span<const ReplayEntry> entries);

  // B draws uniformly with replacement. Throws InvalidArgument when empty.
  std::vector<ReplayEntry> sample(std::size_t batch, Rng& rng) const;

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  // Stored entries, oldest first.
  std::vector<ReplayEntry> contents() const;

 private:
  std::size_t capacity_;
  std::vector<ReplayEntry> entries_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
};

struct TrainConfig {
  int n_iter = 50;
  int n_ep = 16;
  int horizon = 20;  // self-play episode cap H
  std::size_t buffer_capacity = 50000;
  int batch_size = 256;
  int grad_steps = 64;
  double l2 = 1e-4;
  double learning_rate = 1e-3;
  net::OptimizerKind optimizer = net::OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  // Truncated (nonterminal) episodes bootstrap v_{H} from the network.
  bool bootstrap_truncated = true;
  int workers = 1;
  mcts::SearchConfig search;
  net::NetConfig net;  // input/action sizes and binning filled from the game when unset

  void validate() const;
};

struct Episode {
  std::vector<ReplayEntry> entries;
  std::vector<double> rewards;
  bool terminal = false;
};

// Self-play with the search at every state; both actions sampled
// independently from the root strategies.
Episode self_play_episode(const MarkovGame& game, const net::Network& net,
                          const TrainConfig& config, std::uint64_t seed);

struct IterationMetrics {
  int iteration = 0;
  double wall_seconds = 0.0;
  double mean_policy_loss = 0.0;
  double mean_value_loss = 0.0;
  double total_loss = 0.0;
  std::size_t buffer_fill = 0;
  std::optional<double> brv_p1;
  std::optional<double> brv_p2;
  std::optional<double> exploitability;
};

struct TrainHooks {
  // Checkpoints named checkpoint_NNNN.saz are written here when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  // Fills the optional exploitability fields after each iteration.
  std::function<void(const net::Network&, IterationMetrics&)> probe;
  std::function<void(const IterationMetrics&)> on_iteration;
};

struct TrainResult {
  net::Network net;
  std::vector<IterationMetrics> metrics;
};

// Network shape implied by the game: encoding width, action counts, and the
// symmetric binning over the game's value scale.
net::NetConfig net_config_for(const MarkovGame& game, net::NetConfig base);

TrainResult train_loop(const MarkovGame& game, const TrainConfig& config,
                       const TrainHooks& hooks = {});

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, int iteration);

}  // namespace zerosum::train
