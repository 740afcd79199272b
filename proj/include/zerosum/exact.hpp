#pragma once

#include <functional>
#include <unordered_map>

#include "zerosum/game.hpp"
#include "zerosum/matgame.hpp"

namespace zerosum::exact {

struct StageStrategies {
  MixedStrategy pi1;
  MixedStrategy pi2;
};

// V* per reachable state (states carry their depth in `step`). Terminal
// states map to 0.
using ValueTable = std::unordered_map<GameState, double, GameStateHash>;
// Equilibrium stage strategies per reachable nonterminal state.
using StagePolicy = std::unordered_map<GameState, StageStrategies, GameStateHash>;

// Distribution a frozen player uses at a state.
using PolicyFn = std::function<MixedStrategy(const GameState&)>;

struct ExactOptions {
  long node_budget = 1'000'000;
};

struct ExactSolution {
  ValueTable values;
  StagePolicy policy;
  double root_value = 0.0;
};

// Stage matrix A_jk = r(s, j, k) + gamma * V(s o (j, k)) for a state whose
// successor values are already known.
PayoffMatrix stage_matrix(const MarkovGame& game, const GameState& s,
                          const std::function<double(const GameState&)>& successor_value);

// Solves every reachable stage game exactly (LP) from the horizon back to s0.
// Throws BudgetExceeded if more than node_budget nonterminal states are
// reached.
ExactSolution backward_induction(const MarkovGame& game, const GameState& s0,
                                 const ExactOptions& options = {});

// Value to `responder` of its optimal reply to the other player's frozen
// stochastic policy (depth-limited expectimax, memoized on state).
double best_response_value(const MarkovGame& game, const GameState& s0, const PolicyFn& frozen,
                           Player responder, const ExactOptions& options = {});

// Sum of both players' best-response values; zero at an equilibrium.
double joint_exploitability(const MarkovGame& game, const GameState& s0, const PolicyFn& pi1,
                            const PolicyFn& pi2, const ExactOptions& options = {});

// Looks the player's strategy up in a stage policy; throws InvalidArgument
// for states outside the table.
PolicyFn policy_from_table(const StagePolicy& policy, Player player);

PolicyFn uniform_policy(const MarkovGame& game, Player player);

}  // namespace zerosum::exact
