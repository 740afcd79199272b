#include "zerosum/mcts.hpp"

#include <cmath>

#include "zerosum/error.hpp"

namespace zerosum::mcts {

void SearchConfig::validate() const {
  if (n_sim < 1) throw InvalidArgument("search: n_sim must be >= 1");
  if (!(c_puct >= 0.0)) throw InvalidArgument("search: c_puct must be >= 0");
  if (rm_iters < 1) throw InvalidArgument("search: rm_iters must be >= 1");
  if (root_rm_iters < 1) throw InvalidArgument("search: root_rm_iters must be >= 1");
  if (horizon < 1) throw InvalidArgument("search: horizon must be >= 1");
}

PayoffMatrix SearchNode::estimated_payoffs(double gamma) const {
  std::vector<double> a(reward.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = reward[i] + gamma * child_value[i];
  return PayoffMatrix(rows, cols, std::move(a));
}

std::pair<MixedStrategy, MixedStrategy> selection_strategies(const SearchNode& node,
                                                             const SearchConfig& config,
                                                             double gamma) {
  if (!node.expanded) throw InvalidArgument("selection_strategies: node not expanded");
  const PayoffMatrix a_bar = node.estimated_payoffs(gamma);
  const double sqrt_n = std::sqrt(static_cast<double>(node.total_visits));
  PayoffMatrix optimistic1(node.rows, node.cols, 0.0);
  // Player 2's view with players swapped so it is the row maximizer.
  PayoffMatrix optimistic2(node.cols, node.rows, 0.0);
  for (int j = 0; j < node.rows; ++j) {
    for (int k = 0; k < node.cols; ++k) {
      const double bonus = config.c_puct * node.joint_prior(j, k) * sqrt_n /
                           (1.0 + static_cast<double>(node.visits[node.index({j, k})]));
      optimistic1(j, k) = a_bar(j, k) + bonus;
      optimistic2(k, j) = -a_bar(j, k) + bonus;
    }
  }
  GameSolution s1 = regret_matching_solve(optimistic1, config.rm_iters);
  GameSolution s2 = regret_matching_solve(optimistic2, config.rm_iters);
  return {std::move(s1.row_strategy), std::move(s2.row_strategy)};
}

Search::Search(const MarkovGame& game, const Evaluator& evaluator, SearchConfig config,
               std::uint64_t seed)
    : game_(game), evaluator_(evaluator), config_(config), rng_(seed) {
  config_.validate();
}

void Search::reset(const GameState& s0) {
  if (s0.terminal) throw InvalidArgument("Search: root state is terminal");
  root_ = std::make_unique<SearchNode>();
  root_->state = s0;
  node_count_ = 1;
}

SearchResult Search::run(const GameState& s0) {
  reset(s0);
  for (int i = 0; i < config_.n_sim; ++i) simulate(*root_);
  return extract_root_policies();
}

double Search::solve_node(SearchNode& node, int iterations) const {
  const GameSolution sol =
      regret_matching_solve(node.estimated_payoffs(game_.discount()), iterations);
  node.value = sol.value;
  return sol.value;
}

double Search::simulate(SearchNode& node) {
  if (node.terminal || node.state.terminal) return 0.0;
  if (!node.expanded) {
    if (node.depth >= config_.horizon) {
      // Frontier of the depth-limited tree.
      node.value = evaluator_.values(game_, {node.state}).front();
      return node.value;
    }
    expand_node(node);
    return solve_node(node, config_.rm_iters);
  }
  const JointAction a = select_joint_action(node);
  SearchNode& child = *node.children[node.index(a)];
  const double v_child = simulate(child);
  return backup(node, a, v_child);
}

void Search::expand_node(SearchNode& node) {
  if (node.expanded) throw InvalidArgument("expand_node: already expanded");
  if (node.state.terminal) throw InvalidArgument("expand_node: terminal node");
  node.rows = game_.num_actions(node.state, Player::kOne);
  node.cols = game_.num_actions(node.state, Player::kTwo);
  const int size = node.rows * node.cols;
  node.reward.assign(size, 0.0);
  node.child_value.assign(size, 0.0);
  node.visits.assign(size, 0);
  node.total_visits = 0;
  node.children.clear();
  node.children.reserve(size);

  std::vector<GameState> open_states;
  std::vector<int> open_index;
  for (int j = 0; j < node.rows; ++j) {
    for (int k = 0; k < node.cols; ++k) {
      StepResult r = game_.step(node.state, {j, k});
      const int idx = node.index({j, k});
      node.reward[idx] = r.reward1;
      auto child = std::make_unique<SearchNode>();
      child->state = std::move(r.next);
      child->depth = node.depth + 1;
      child->terminal = r.terminal;
      if (!r.terminal) {
        open_states.push_back(child->state);
        open_index.push_back(idx);
      }
      node.children.push_back(std::move(child));
    }
  }
  node_count_ += size;
  if (!open_states.empty()) {
    const std::vector<double> v = evaluator_.values(game_, open_states);
    for (std::size_t i = 0; i < v.size(); ++i) node.child_value[open_index[i]] = v[i];
  }
  Evaluation priors = evaluator_.evaluate(game_, node.state);
  node.prior1 = std::move(priors.p1);
  node.prior2 = std::move(priors.p2);
  node.expanded = true;
}

JointAction Search::select_joint_action(const SearchNode& node) {
  const auto [x, y] = selection_strategies(node, config_, game_.discount());
  const int a1 = rng_.categorical(x.probs());
  const int a2 = rng_.categorical(y.probs());
  return {a1, a2};
}

double Search::backup(SearchNode& node, JointAction a, double child_value) {
  const int idx = node.index(a);
  ++node.visits[idx];
  ++node.total_visits;
  node.child_value[idx] = child_value;
  return solve_node(node, config_.rm_iters);
}

SearchResult Search::extract_root_policies() const {
  if (!root_ || !root_->expanded) throw InvalidArgument("extract_root_policies: root not expanded");
  GameSolution sol =
      regret_matching_solve(root_->estimated_payoffs(game_.discount()), config_.root_rm_iters);
  return SearchResult{std::move(sol.row_strategy), std::move(sol.col_strategy), sol.value};
}

SearchResult run_search(const MarkovGame& game, const GameState& s0, const Evaluator& evaluator,
                        const SearchConfig& config, std::uint64_t seed) {
  Search search(game, evaluator, config, seed);
  return search.run(s0);
}

}  // namespace zerosum::mcts
