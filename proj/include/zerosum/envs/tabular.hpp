#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "zerosum/game.hpp"
#include "zerosum/matgame.hpp"

namespace zerosum::envs {

// A fixed stage matrix played `horizon` times. The state is the step index,
// encoded one-hot.
class RepeatedMatrixGame final : public MarkovGame {
 public:
  RepeatedMatrixGame(std::string name, PayoffMatrix stage, int horizon, double discount);

  std::string name() const override { return name_; }
  int num_actions(const GameState&, Player p) const override { return max_actions(p); }
  int max_actions(Player p) const override {
    return p == Player::kOne ? stage_.rows() : stage_.cols();
  }
  GameState initial_state(Rng& rng) const override;
  using MarkovGame::initial_state;
  std::vector<double> encode(const GameState& s) const override;
  int encoding_size() const override { return horizon(); }
  double max_abs_reward() const override { return stage_.max_abs(); }
  bool tabular() const override { return true; }

  const PayoffMatrix& stage() const { return stage_; }

 protected:
  StepResult apply(const GameState& s, JointAction a) const override;

 private:
  std::string name_;
  PayoffMatrix stage_;
};

// Simultaneous pursuit on a k x k torus. Player 1 pursues, player 2 evades;
// moving onto (or swapping through) the evader's cell captures it for +1.
// Actions: stay, +x, -x, +y, -y.
class GridPursuitGame final : public MarkovGame {
 public:
  GridPursuitGame(int size, int horizon, double discount);

  std::string name() const override;
  int num_actions(const GameState&, Player) const override { return 5; }
  int max_actions(Player) const override { return 5; }
  GameState initial_state(Rng& rng) const override;
  using MarkovGame::initial_state;
  std::vector<double> encode(const GameState& s) const override;
  int encoding_size() const override { return 2 * size_ * size_ + horizon(); }
  double max_abs_reward() const override { return 1.0; }
  bool tabular() const override { return true; }

 protected:
  StepResult apply(const GameState& s, JointAction a) const override;

 private:
  int size_;
};

// Complete tree of depth `depth` with n x m joint actions at every node and
// rewards drawn uniformly from [reward_lo, reward_hi] by hashing
// (seed, node, action). Children never merge.
class RandomTreeGame final : public MarkovGame {
 public:
  RandomTreeGame(int rows, int cols, int depth, std::uint64_t seed, double discount = 1.0,
                 double reward_lo = -1.0, double reward_hi = 1.0);

  std::string name() const override;
  int num_actions(const GameState&, Player p) const override { return max_actions(p); }
  int max_actions(Player p) const override { return p == Player::kOne ? rows_ : cols_; }
  GameState initial_state(Rng& rng) const override;
  using MarkovGame::initial_state;
  std::vector<double> encode(const GameState& s) const override;
  int encoding_size() const override;
  double max_abs_reward() const override;
  bool tabular() const override { return true; }

  double reward(std::uint64_t node, JointAction a) const;

 protected:
  StepResult apply(const GameState& s, JointAction a) const override;

 private:
  int rows_;
  int cols_;
  std::uint64_t seed_;
  double reward_lo_;
  double reward_hi_;
};

PayoffMatrix matching_pennies_matrix();
PayoffMatrix rock_paper_scissors_matrix();
// [[2, -1], [-1, 1]]: value 0.2 with equilibrium (0.4, 0.6) for both players.
PayoffMatrix asym22_matrix();

// Builds a validation fixture by name: "matching_pennies(H)", "rps(H)",
// "asym22(H)", "grid_pursuit(k,H)", "random_tree(n,m,D,seed)".
// Throws InvalidArgument for unknown names or malformed arguments.
GamePtr make_tabular_toy(const std::string& spec, double discount = 1.0);

}  // namespace zerosum::envs
