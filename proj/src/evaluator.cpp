#include "zerosum/evaluator.hpp"

#include "zerosum/error.hpp"

namespace zerosum {

std::vector<double> Evaluator::values(const MarkovGame& game,
                                      const std::vector<GameState>& states) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(evaluate(game, s).value);
  return out;
}

Evaluation UniformEvaluator::evaluate(const MarkovGame& game, const GameState& s) const {
  const int n = game.num_actions(s, Player::kOne);
  const int m = game.num_actions(s, Player::kTwo);
  return Evaluation{std::vector<double>(n, 1.0 / n), std::vector<double>(m, 1.0 / m), 0.0};
}

Evaluation TableEvaluator::evaluate(const MarkovGame& game, const GameState& s) const {
  Evaluation e = UniformEvaluator().evaluate(game, s);
  auto it = table_.find(s);
  if (it == table_.end()) throw InvalidArgument("TableEvaluator: state not in value table");
  e.value = it->second;
  return e;
}

std::vector<double> restrict_distribution(const std::vector<double>& dist, int count) {
  if (count > static_cast<int>(dist.size())) {
    throw InvalidArgument("restrict_distribution: more actions than head outputs");
  }
  std::vector<double> out(dist.begin(), dist.begin() + count);
  double total = 0.0;
  for (double p : out) total += p;
  if (total > 0.0) {
    for (double& p : out) p /= total;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / count);
  }
  return out;
}

Evaluation NetworkEvaluator::evaluate(const MarkovGame& game, const GameState& s) const {
  const net::NetworkOutput o = net_.forward(game.encode(s));
  return Evaluation{restrict_distribution(o.p1, game.num_actions(s, Player::kOne)),
                    restrict_distribution(o.p2, game.num_actions(s, Player::kTwo)), o.value};
}

std::vector<double> NetworkEvaluator::values(const MarkovGame& game,
                                             const std::vector<GameState>& states) const {
  std::vector<std::vector<double>> xs;
  xs.reserve(states.size());
  for (const auto& s : states) xs.push_back(game.encode(s));
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& o : net_.forward_batch(xs)) out.push_back(o.value);
  return out;
}

}  // namespace zerosum
