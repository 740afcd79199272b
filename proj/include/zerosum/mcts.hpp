#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "zerosum/evaluator.hpp"
#include "zerosum/game.hpp"
#include "zerosum/matgame.hpp"
#include "zerosum/rng.hpp"

namespace zerosum::mcts {

struct SearchConfig {
  int n_sim = 128;
  double c_puct = 2.0;
  int rm_iters = 32;
  int root_rm_iters = 512;
  // Maximum tree depth below the root; unexpanded nodes at this depth are
  // valued by the evaluator. The discount comes from the game.
  int horizon = 20;

  void validate() const;
};

// Per-state statistics of the tree of matrix games. Child tables are
// row-major over joint actions (j, k).
struct SearchNode {
  GameState state;
  int depth = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> reward;       // R_jk
  std::vector<double> child_value;  // V_jk
  std::vector<long> visits;         // N(s, j, k)
  long total_visits = 0;            // N(s)
  std::vector<double> prior1;
  std::vector<double> prior2;
  std::vector<std::unique_ptr<SearchNode>> children;
  double value = 0.0;
  bool expanded = false;
  bool terminal = false;

  int index(JointAction a) const { return a.a1 * cols + a.a2; }
  double joint_prior(int j, int k) const { return prior1[j] * prior2[k]; }
  // A_bar = R + gamma * V
  PayoffMatrix estimated_payoffs(double gamma) const;
};

struct SearchResult {
  MixedStrategy pi1;
  MixedStrategy pi2;
  double v_root;
};

// Strategies the two players draw their selection from: regret matching on
// A_bar + bonus (player 1) and on -A_bar + bonus (player 2, as maximizer),
// where bonus_jk = c_puct * P_jk * sqrt(N(s)) / (1 + N(s, j, k)).
std::pair<MixedStrategy, MixedStrategy> selection_strategies(const SearchNode& node,
                                                             const SearchConfig& config,
                                                             double gamma);

// Simultaneous-move search with minimax (matrix-game) backups. Owns its tree;
// single-threaded.
class Search {
 public:
  Search(const MarkovGame& game, const Evaluator& evaluator, SearchConfig config,
         std::uint64_t seed);

  // Discards any previous tree and roots a new one at s0 (nonterminal).
  void reset(const GameState& s0);
  SearchResult run(const GameState& s0);

  double simulate(SearchNode& node);
  void expand_node(SearchNode& node);
  JointAction select_joint_action(const SearchNode& node);
  double backup(SearchNode& node, JointAction a, double child_value);
  SearchResult extract_root_policies() const;

  SearchNode& root() { return *root_; }
  const SearchNode& root() const { return *root_; }
  long node_count() const { return node_count_; }

 private:
  double solve_node(SearchNode& node, int iterations) const;

  const MarkovGame& game_;
  const Evaluator& evaluator_;
  SearchConfig config_;
  Rng rng_;
  std::unique_ptr<SearchNode> root_;
  long node_count_ = 0;
};

SearchResult run_search(const MarkovGame& game, const GameState& s0, const Evaluator& evaluator,
                        const SearchConfig& config, std::uint64_t seed);

}  // namespace zerosum::mcts
