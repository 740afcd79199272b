#pragma once

#include <vector>

#include "zerosum/exact.hpp"
#include "zerosum/game.hpp"
#include "zerosum/net.hpp"

namespace zerosum {

// Priors for both players over the actions available at a state, plus a
// player-1 value estimate.
struct Evaluation {
  std::vector<double> p1;
  std::vector<double> p2;
  double value = 0.0;
};

// Oracle consulted by the search: the network in production, simple
// baselines in tests.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const MarkovGame& game, const GameState& s) const = 0;
  // Player-1 value estimates for nonterminal states.
  virtual std::vector<double> values(const MarkovGame& game,
                                     const std::vector<GameState>& states) const;
};

// Uniform priors and zero value.
class UniformEvaluator final : public Evaluator {
 public:
  Evaluation evaluate(const MarkovGame& game, const GameState& s) const override;
};

// Uniform priors with exact values from a solved table.
class TableEvaluator final : public Evaluator {
 public:
  explicit TableEvaluator(exact::ValueTable table) : table_(std::move(table)) {}
  Evaluation evaluate(const MarkovGame& game, const GameState& s) const override;

 private:
  exact::ValueTable table_;
};

// Network heads restricted to the actions available at the state and
// renormalized; value is the head's expectation.
class NetworkEvaluator final : public Evaluator {
 public:
  explicit NetworkEvaluator(const net::Network& net) : net_(net) {}
  Evaluation evaluate(const MarkovGame& game, const GameState& s) const override;
  std::vector<double> values(const MarkovGame& game,
                             const std::vector<GameState>& states) const override;

 private:
  const net::Network& net_;
};

// Restricts a head distribution to the first `count` actions and
// renormalizes (uniform if the retained mass vanishes).
std::vector<double> restrict_distribution(const std::vector<double>& dist, int count);

}  // namespace zerosum
