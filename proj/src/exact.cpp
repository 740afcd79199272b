#include "zerosum/exact.hpp"

#include <memory>

#include "zerosum/error.hpp"

namespace zerosum::exact {

PayoffMatrix stage_matrix(const MarkovGame& game, const GameState& s,
                          const std::function<double(const GameState&)>& successor_value) {
  const int n = game.num_actions(s, Player::kOne);
  const int m = game.num_actions(s, Player::kTwo);
  PayoffMatrix a(n, m, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < m; ++k) {
      const StepResult r = game.step(s, {j, k});
      const double future = r.terminal ? 0.0 : successor_value(r.next);
      a(j, k) = r.reward1 + game.discount() * future;
    }
  }
  return a;
}

namespace {

class BackwardInduction {
 public:
  BackwardInduction(const MarkovGame& game, const ExactOptions& options)
      : game_(game), options_(options) {}

  double value(const GameState& s) {
    if (s.terminal) {
      out_.values.emplace(s, 0.0);
      return 0.0;
    }
    if (auto it = out_.values.find(s); it != out_.values.end()) return it->second;
    if (++nodes_ > options_.node_budget) {
      throw BudgetExceeded("backward_induction: node budget of " +
                           std::to_string(options_.node_budget) + " exceeded");
    }
    const PayoffMatrix a =
        stage_matrix(game_, s, [this](const GameState& next) { return value(next); });
    GameSolution sol = solve_lp(a);
    out_.policy.emplace(s, StageStrategies{sol.row_strategy, sol.col_strategy});
    out_.values.emplace(s, sol.value);
    return sol.value;
  }

  ExactSolution take() { return std::move(out_); }

 private:
  const MarkovGame& game_;
  const ExactOptions& options_;
  ExactSolution out_;
  long nodes_ = 0;
};

class BestResponse {
 public:
  BestResponse(const MarkovGame& game, const PolicyFn& frozen, Player responder,
               const ExactOptions& options)
      : game_(game), frozen_(frozen), responder_(responder), options_(options) {}

  double value(const GameState& s) {
    if (s.terminal) return 0.0;
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    if (++nodes_ > options_.node_budget) {
      throw BudgetExceeded("best_response_value: node budget of " +
                           std::to_string(options_.node_budget) + " exceeded");
    }
    const Player frozen_player = other(responder_);
    const int frozen_count = game_.num_actions(s, frozen_player);
    const int own_count = game_.num_actions(s, responder_);
    const MixedStrategy dist = frozen_(s);
    if (dist.size() != frozen_count) {
      throw InvalidArgument("best_response_value: frozen policy has wrong action count");
    }
    const double sign = responder_ == Player::kOne ? 1.0 : -1.0;
    double best = 0.0;
    for (int r = 0; r < own_count; ++r) {
      double expected = 0.0;
      for (int f = 0; f < frozen_count; ++f) {
        if (dist[f] == 0.0) continue;
        const JointAction a = responder_ == Player::kOne ? JointAction{r, f} : JointAction{f, r};
        const StepResult step = game_.step(s, a);
        const double future = step.terminal ? 0.0 : value(step.next);
        expected += dist[f] * (sign * step.reward1 + game_.discount() * future);
      }
      // Strict comparison keeps the lowest-index maximizer.
      if (r == 0 || expected > best) best = expected;
    }
    memo_.emplace(s, best);
    return best;
  }

 private:
  const MarkovGame& game_;
  const PolicyFn& frozen_;
  Player responder_;
  const ExactOptions& options_;
  std::unordered_map<GameState, double, GameStateHash> memo_;
  long nodes_ = 0;
};

}  // namespace

ExactSolution backward_induction(const MarkovGame& game, const GameState& s0,
                                 const ExactOptions& options) {
  BackwardInduction solver(game, options);
  const double root = solver.value(s0);
  ExactSolution out = solver.take();
  out.root_value = root;
  return out;
}

double best_response_value(const MarkovGame& game, const GameState& s0, const PolicyFn& frozen,
                           Player responder, const ExactOptions& options) {
  BestResponse br(game, frozen, responder, options);
  return br.value(s0);
}

double joint_exploitability(const MarkovGame& game, const GameState& s0, const PolicyFn& pi1,
                            const PolicyFn& pi2, const ExactOptions& options) {
  return best_response_value(game, s0, pi1, Player::kTwo, options) +
         best_response_value(game, s0, pi2, Player::kOne, options);
}

PolicyFn policy_from_table(const StagePolicy& policy, Player player) {
  return [&policy, player](const GameState& s) -> MixedStrategy {
    auto it = policy.find(s);
    if (it == policy.end()) throw InvalidArgument("policy_from_table: state not in policy");
    return player == Player::kOne ? it->second.pi1 : it->second.pi2;
  };
}

PolicyFn uniform_policy(const MarkovGame& game, Player player) {
  return [&game, player](const GameState& s) {
    return MixedStrategy::uniform(game.num_actions(s, player));
  };
}

}  // namespace zerosum::exact
