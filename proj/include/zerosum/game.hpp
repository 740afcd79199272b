#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zerosum/matgame.hpp"
#include "zerosum/rng.hpp"

namespace zerosum {

enum class Player : int { kOne = 0, kTwo = 1 };

constexpr Player other(Player p) { return p == Player::kOne ? Player::kTwo : Player::kOne; }
constexpr int index_of(Player p) { return static_cast<int>(p); }

struct JointAction {
  int a1 = 0;
  int a2 = 0;
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

// Opaque environment state. The layout of `data` is owned by the game;
// `step` counts transitions from the initial state.
struct GameState {
  std::vector<double> data;
  int step = 0;
  bool terminal = false;

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct GameStateHash {
  std::size_t operator()(const GameState& s) const noexcept;
};

struct StepResult {
  GameState next;
  double reward1 = 0.0;
  bool terminal = false;

  double reward2() const { return -reward1; }
};

struct TrajectoryStep {
  GameState state;
  MixedStrategy pi1;
  MixedStrategy pi2;
  double reward1;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool ended_terminal = false;
};

// Two-player zero-sum simultaneous-move deterministic Markov game with a
// finite horizon. Implementations are immutable after construction and
// shareable across threads.
class MarkovGame {
 public:
  virtual ~MarkovGame() = default;

  virtual std::string name() const = 0;

  int horizon() const { return horizon_; }
  double discount() const { return discount_; }

  // Action count for `player` at a nonterminal state.
  virtual int num_actions(const GameState& s, Player player) const = 0;
  // Upper bound of num_actions over all states (network head width).
  virtual int max_actions(Player player) const = 0;

  // Sample from the initial-state distribution.
  virtual GameState initial_state(Rng& rng) const = 0;
  GameState initial_state() const;

  // Deterministic transition. Validates the action and terminal status, then
  // advances the step counter; reaching the horizon terminates the episode.
  StepResult step(const GameState& s, JointAction a) const;

  virtual std::vector<double> encode(const GameState& s) const = 0;
  virtual int encoding_size() const = 0;

  // Bound on |reward1| for a single transition.
  virtual double max_abs_reward() const = 0;

  // True when the state space is small and finite (exact memoized solving).
  virtual bool tabular() const { return false; }

  // sum_{t<D} gamma^t * max|r|: range of any value in the game.
  double value_scale() const;

 protected:
  MarkovGame(int horizon, double discount);

  // Transition without horizon bookkeeping. `next.step` is set by step().
  virtual StepResult apply(const GameState& s, JointAction a) const = 0;

 private:
  int horizon_;
  double discount_;
};

using GamePtr = std::shared_ptr<const MarkovGame>;

}  // namespace zerosum
