#include "zerosum/train.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <atomic>
#include <mutex>
#include <thread>

#include "zerosum/error.hpp"
#include "zerosum/evaluator.hpp"

namespace zerosum::train {

std::vector<double> compute_returns(std::span<const double> rewards, double gamma,
                                    double bootstrap) {
  std::vector<double> out(rewards.size());
  double next = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    next = rewards[i] + gamma * next;
    out[i] = next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay buffer

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("replay buffer: capacity must be >= 1");
  entries_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::insert(ReplayEntry entry) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(entry));
    return;
  }
  entries_[cursor_] = std::move(entry);
  cursor_ = (cursor_ + 1) % capacity_;
}

void ReplayBuffer::insert(std::span<const ReplayEntry> entries) {
  for (const auto& e : entries) insert(e);
}

std::vector<ReplayEntry> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (entries_.empty()) throw InvalidArgument("replay buffer: cannot sample an empty buffer");
  std::vector<ReplayEntry> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out.push_back(entries_[static_cast<std::size_t>(rng.index(static_cast<int>(entries_.size())))]);
  }
  return out;
}

std::vector<ReplayEntry> ReplayBuffer::contents() const {
  std::vector<ReplayEntry> out;
  out.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out.push_back(entries_[(cursor_ + i) % entries_.size()]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  if (n_iter < 1) throw InvalidArgument("train.n_iter must be >= 1");
  if (n_ep < 1) throw InvalidArgument("train.n_ep must be >= 1");
  if (horizon < 1) throw InvalidArgument("train.horizon must be >= 1");
  if (buffer_capacity < 1) throw InvalidArgument("train.buffer_capacity must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train.batch_size must be >= 1");
  if (grad_steps < 1) throw InvalidArgument("train.grad_steps must be >= 1");
  if (!(l2 >= 0.0)) throw InvalidArgument("train.l2 must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("train.learning_rate must be > 0");
  if (workers < 1) throw InvalidArgument("train.workers must be >= 1");
  search.validate();
}

net::NetConfig net_config_for(const MarkovGame& game, net::NetConfig base) {
  base.input_size = game.encoding_size();
  base.actions1 = game.max_actions(Player::kOne);
  base.actions2 = game.max_actions(Player::kTwo);
  const double ratio = base.binning.sigma / base.binning.width();
  const double scale = std::max(game.value_scale(), 1e-6);
  base.binning = net::ValueBinning::symmetric(scale, base.binning.bins, ratio);
  return base;
}

// ---------------------------------------------------------------------------
// Self-play

namespace {

std::vector<double> padded(const MixedStrategy& s, int width) {
  std::vector<double> out(s.vector());
  out.resize(width, 0.0);
  return out;
}

}  // namespace

Episode self_play_episode(const MarkovGame& game, const net::Network& net,
                          const TrainConfig& config, std::uint64_t seed) {
  NetworkEvaluator evaluator(net);
  Rng rng(derive_seed(seed, "episode"));
  GameState s = game.initial_state(rng);
  Episode ep;
  std::vector<GameState> states;
  int t = 0;
  while (!s.terminal && t < config.horizon) {
    mcts::SearchResult sr = mcts::run_search(game, s, evaluator, config.search,
                                             derive_seed(seed, "search", static_cast<std::uint64_t>(t)));
    const JointAction a{rng.categorical(sr.pi1.probs()), rng.categorical(sr.pi2.probs())};
    ep.entries.push_back(ReplayEntry{game.encode(s), MixedStrategy(padded(sr.pi1, net.actions1())),
                                     MixedStrategy(padded(sr.pi2, net.actions2())), 0.0});
    StepResult r = game.step(s, a);
    ep.rewards.push_back(r.reward1);
    s = std::move(r.next);
    ++t;
  }
  ep.terminal = s.terminal;
  double bootstrap = 0.0;
  if (!s.terminal && config.bootstrap_truncated) bootstrap = net.forward(game.encode(s)).value;
  const std::vector<double> v = compute_returns(ep.rewards, game.discount(), bootstrap);
  for (std::size_t i = 0; i < v.size(); ++i) ep.entries[i].v1 = v[i];
  return ep;
}

// ---------------------------------------------------------------------------
// Training loop

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, int iteration) {
  char name[32];
  std::snprintf(name, sizeof(name), "checkpoint_%04d.saz", iteration);
  return dir / name;
}

TrainResult train_loop(const MarkovGame& game, const TrainConfig& config,
                       const TrainHooks& hooks) {
  config.validate();
  net::NetConfig arch = config.net;
  if (arch.input_size == 0) arch = net_config_for(game, arch);
  arch.seed = derive_seed(config.seed, "net");
  net::Network learner(arch);
  net::Optimizer optimizer(config.optimizer);
  ReplayBuffer buffer(config.buffer_capacity);
  std::vector<IterationMetrics> metrics;

  for (int iter = 1; iter <= config.n_iter; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    // Self-play reads a snapshot fixed for the whole iteration.
    const net::Network snapshot = learner;
    std::vector<Episode> episodes(config.n_ep);
    const auto run_episode = [&](int e) {
      episodes[e] = self_play_episode(
          game, snapshot, config,
          derive_seed(config.seed, "selfplay",
                      static_cast<std::uint64_t>(iter) * 1000003ULL + static_cast<std::uint64_t>(e)));
    };
    if (config.workers <= 1) {
      for (int e = 0; e < config.n_ep; ++e) run_episode(e);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      for (int w = 0; w < config.workers; ++w) {
        pool.emplace_back([&] {
          for (int e = next++; e < config.n_ep; e = next++) {
            try {
              run_episode(e);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
    }
    // Inserts happen in episode order regardless of completion order.
    for (const auto& ep : episodes) buffer.insert(ep.entries);

    Rng batch_rng(derive_seed(config.seed, "minibatch", static_cast<std::uint64_t>(iter)));
    IterationMetrics m;
    m.iteration = iter;
    for (int k = 0; k < config.grad_steps; ++k) {
      const std::vector<ReplayEntry> batch =
          buffer.sample(static_cast<std::size_t>(config.batch_size), batch_rng);
      std::vector<net::TrainingSample> samples;
      samples.reserve(batch.size());
      for (const auto& e : batch) samples.push_back({e.x, e.pi1.vector(), e.pi2.vector(), e.v1});
      net::LossAndGrads lg = net::loss_grads(learner, samples, config.l2);
      optimizer.step(learner.mutable_params(), lg.grads, config.learning_rate);
      m.mean_policy_loss += lg.loss.policy / config.grad_steps;
      m.mean_value_loss += lg.loss.value / config.grad_steps;
      m.total_loss += lg.loss.total / config.grad_steps;
    }
    if (!learner.params().all_finite()) throw SolverFailure("training diverged: non-finite weights");
    m.buffer_fill = buffer.size();
    if (hooks.probe) hooks.probe(learner, m);
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (hooks.checkpoint_dir) {
      std::filesystem::create_directories(*hooks.checkpoint_dir);
      net::save_checkpoint(learner, checkpoint_name(*hooks.checkpoint_dir, iter));
    }
    if (hooks.on_iteration) hooks.on_iteration(m);
    metrics.push_back(m);
  }
  return TrainResult{std::move(learner), std::move(metrics)};
}

}  // namespace zerosum::train
