#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zerosum/exact.hpp"
#include "zerosum/game.hpp"
#include "zerosum/mcts.hpp"
#include "zerosum/net.hpp"

namespace zerosum::evalx {

// ---------------------------------------------------------------------------
// Frontier error propagation

struct ErrorTrialConfig {
  int depth = 3;
  int rows = 2;
  int cols = 2;
  double gamma = 0.9;
  double epsilon = 1.0;
  double reward_lo = -1.0;
  double reward_hi = 1.0;
  int trials = 1;
  int draws = 32;  // perturbation draws per tree
  std::uint64_t seed = 0;
  long node_budget = 1'000'000;

  void validate() const;
};

struct ErrorTrialResult {
  double max_root_error = 0.0;
  double bound = 0.0;
  bool pass = true;
};

// Random tree games whose depth-D frontier carries "true" values. Each
// frontier value is perturbed independently by U[-eps, eps] and the root
// minimax value recomputed; the largest deviation is compared against
// gamma^D * eps.
ErrorTrialResult error_propagation_trial(const ErrorTrialConfig& config);

// ---------------------------------------------------------------------------
// Exploitability of network policies

enum class PolicyMode { kRaw, kMcts };

struct EvalOptions {
  PolicyMode mode = PolicyMode::kRaw;
  mcts::SearchConfig search;
  std::uint64_t seed = 0;
  long node_budget = 1'000'000;
  // Continuous-state games use exact expectimax only within these limits.
  int exact_max_horizon = 6;
  int exact_max_actions = 3;
  bool force_sampled = false;
  // Sampled best response: the responder plays a depth-limited expectimax
  // lookahead and its return is averaged over rollouts.
  int sampled_lookahead = 2;
  int sampled_rollouts = 64;
  int workers = 1;

  void validate() const;
};

struct EvalRow {
  std::string setting;
  double brv_p1 = 0.0;
  double brv_p2 = 0.0;
  double exploitability = 0.0;
  int search_iters = 0;  // 0 for the raw network
  std::uint64_t seed = 0;
  bool exact = true;
};

struct AggregateRow {
  std::string setting;
  int search_iters = 0;
  int seeds = 0;
  double mean_exploitability = 0.0;
  double std_exploitability = 0.0;
  double mean_brv_p1 = 0.0;
  double mean_brv_p2 = 0.0;
  bool exact = true;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<AggregateRow> aggregates;
};

// Whether evaluate_policy_network would use the exact best response.
bool exact_evaluation_available(const MarkovGame& game, const EvalOptions& options);

// Per-state policy of one player: the raw head restricted to legal actions,
// or the search root strategy (computed once per distinct state).
exact::PolicyFn network_policy(const MarkovGame& game, const net::Network& net, Player player,
                               const EvalOptions& options);

// Freezes each player's policy in turn against a best responder.
// brv_p1 is player 1's value against a best-responding player 2 (and
// likewise brv_p2); exploitability = -(brv_p1 + brv_p2).
EvalRow evaluate_policy_network(const MarkovGame& game, const net::Network& net,
                                const EvalOptions& options);

// Same, for arbitrary per-state policies.
EvalRow evaluate_policies(const MarkovGame& game, const exact::PolicyFn& pi1,
                          const exact::PolicyFn& pi2, const EvalOptions& options);

// One row per (search budget, seed), then one aggregate per budget. A budget
// of 0 evaluates the raw network. Row seeds are mixed with options.seed.
EvalReport exploitability_vs_search_curve(const MarkovGame& game, const net::Network& net,
                                          const std::vector<int>& iters_list,
                                          const std::vector<std::uint64_t>& seeds,
                                          EvalOptions options);

void write_eval_csv(const EvalReport& report, const std::filesystem::path& path);
void write_aggregate_csv(const EvalReport& report, const std::filesystem::path& path);
// JSON summary: rows, aggregates, and the caller's config echo (JSON text).
void write_eval_json(const EvalReport& report, const std::string& config_json,
                     const std::filesystem::path& path);

}  // namespace zerosum::evalx
