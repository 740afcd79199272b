#include "zerosum/evalx.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "zerosum/envs/tabular.hpp"
#include "zerosum/error.hpp"
#include "zerosum/evaluator.hpp"

namespace zerosum::evalx {

// ---------------------------------------------------------------------------
// Frontier error propagation

void ErrorTrialConfig::validate() const {
  if (depth < 1) throw InvalidArgument("error trial: depth must be >= 1");
  if (rows < 1 || cols < 1) throw InvalidArgument("error trial: action counts must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("error trial: gamma must lie in [0, 1]");
  if (!(epsilon >= 0.0)) throw InvalidArgument("error trial: epsilon must be >= 0");
  if (!(reward_lo <= reward_hi)) throw InvalidArgument("error trial: reward_lo > reward_hi");
  if (trials < 1 || draws < 1) throw InvalidArgument("error trial: trials and draws must be >= 1");
}

namespace {

class FrontierTree {
 public:
  FrontierTree(const envs::RandomTreeGame& game, int depth) : game_(game), depth_(depth) {}

  template <typename Frontier>
  double value(const GameState& s, const Frontier& frontier) const {
    const int n = game_.num_actions(s, Player::kOne);
    const int m = game_.num_actions(s, Player::kTwo);
    PayoffMatrix a(n, m, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < m; ++k) {
        const StepResult r = game_.step(s, {j, k});
        const double future = r.next.step == depth_
                                  ? frontier(static_cast<std::uint64_t>(r.next.data[0]))
                                  : value(r.next, frontier);
        a(j, k) = r.reward1 + game_.discount() * future;
      }
    }
    return solve_lp(a).value;
  }

 private:
  const envs::RandomTreeGame& game_;
  int depth_;
};

}  // namespace

ErrorTrialResult error_propagation_trial(const ErrorTrialConfig& config) {
  config.validate();
  const double branching = static_cast<double>(config.rows) * config.cols;
  if (std::pow(branching, config.depth) > static_cast<double>(config.node_budget)) {
    throw BudgetExceeded("error trial: tree exceeds the node budget");
  }
  ErrorTrialResult out;
  out.bound = std::pow(config.gamma, config.depth) * config.epsilon;
  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, "tree", static_cast<std::uint64_t>(t));
    const envs::RandomTreeGame game(config.rows, config.cols, config.depth, tree_seed, config.gamma,
                              config.reward_lo, config.reward_hi);
    const FrontierTree tree(game, config.depth);
    const GameState root = game.initial_state();
    const auto true_value = [&](std::uint64_t node) {
      Rng rng(derive_seed(tree_seed, "frontier", node));
      return rng.uniform(config.reward_lo, config.reward_hi);
    };
    const double exact_root = tree.value(root, true_value);
    for (int d = 0; d < config.draws; ++d) {
      const std::uint64_t draw_seed = derive_seed(tree_seed, "perturb", static_cast<std::uint64_t>(d));
      const auto perturbed = [&](std::uint64_t node) {
        Rng rng(derive_seed(draw_seed, "node", node));
        return true_value(node) + rng.uniform(-config.epsilon, config.epsilon);
      };
      const double err = std::abs(tree.value(root, perturbed) - exact_root);
      out.max_root_error = std::max(out.max_root_error, err);
    }
  }
  out.pass = out.max_root_error <= out.bound + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Policies

void EvalOptions::validate() const {
  if (mode == PolicyMode::kMcts) search.validate();
  if (node_budget < 1) throw InvalidArgument("eval: node_budget must be >= 1");
  if (sampled_lookahead < 1) throw InvalidArgument("eval: sampled_lookahead must be >= 1");
  if (sampled_rollouts < 1) throw InvalidArgument("eval: sampled_rollouts must be >= 1");
  if (workers < 1) throw InvalidArgument("eval: workers must be >= 1");
}

bool exact_evaluation_available(const MarkovGame& game, const EvalOptions& options) {
  if (options.force_sampled) return false;
  if (game.tabular()) return true;
  return game.horizon() <= options.exact_max_horizon &&
         game.max_actions(Player::kOne) <= options.exact_max_actions &&
         game.max_actions(Player::kTwo) <= options.exact_max_actions;
}

namespace {

struct SearchCache {
  std::mutex mutex;
  std::unordered_map<GameState, mcts::SearchResult, GameStateHash> results;
};

}  // namespace

namespace {

std::pair<exact::PolicyFn, exact::PolicyFn> network_policies(const MarkovGame& game,
                                                             const net::Network& net,
                                                             const EvalOptions& options) {
  if (options.mode == PolicyMode::kRaw) {
    const auto raw = [&game, &net](Player player) -> exact::PolicyFn {
      return [&game, &net, player](const GameState& s) {
        const net::NetworkOutput out = net.forward(game.encode(s));
        const auto& head = player == Player::kOne ? out.p1 : out.p2;
        return MixedStrategy::normalized(restrict_distribution(head, game.num_actions(s, player)));
      };
    };
    return {raw(Player::kOne), raw(Player::kTwo)};
  }
  // Both players' strategies at a state come from the same search.
  auto cache = std::make_shared<SearchCache>();
  const mcts::SearchConfig search = options.search;
  const std::uint64_t seed = options.seed;
  const auto searched = [&game, &net, cache, search, seed](Player player) -> exact::PolicyFn {
    return [&game, &net, cache, search, seed, player](const GameState& s) {
      const auto pick = [player](const mcts::SearchResult& r) {
        return player == Player::kOne ? r.pi1 : r.pi2;
      };
      {
        std::lock_guard lock(cache->mutex);
        if (auto it = cache->results.find(s); it != cache->results.end()) return pick(it->second);
      }
      const NetworkEvaluator evaluator(net);
      mcts::SearchResult r = mcts::run_search(game, s, evaluator, search,
                                              derive_seed(seed, "eval-search", GameStateHash{}(s)));
      std::lock_guard lock(cache->mutex);
      return pick(cache->results.emplace(s, std::move(r)).first->second);
    };
  };
  return {searched(Player::kOne), searched(Player::kTwo)};
}

}  // namespace

exact::PolicyFn network_policy(const MarkovGame& game, const net::Network& net, Player player,
                               const EvalOptions& options) {
  auto [pi1, pi2] = network_policies(game, net, options);
  return player == Player::kOne ? pi1 : pi2;
}

namespace {

// Responder plays the argmax of a depth-limited expectimax against the
// frozen policy; the realized return is an unbiased estimate of that
// responder's value, hence a lower bound on the best-response value.
class SampledResponder {
 public:
  SampledResponder(const MarkovGame& game, const exact::PolicyFn& frozen, Player responder,
                   int lookahead)
      : game_(game), frozen_(frozen), responder_(responder), lookahead_(lookahead) {}

  double rollout(GameState s, Rng& rng) const {
    double total = 0.0;
    double discount = 1.0;
    while (!s.terminal) {
      const int a_resp = best_action(s);
      const MixedStrategy f = frozen_(s);
      const int a_frozen = rng.categorical(f.probs());
      const StepResult r = game_.step(s, joint(a_resp, a_frozen));
      total += discount * signed_reward(r.reward1);
      discount *= game_.discount();
      s = r.next;
    }
    return total;
  }

 private:
  JointAction joint(int resp, int frozen) const {
    return responder_ == Player::kOne ? JointAction{resp, frozen} : JointAction{frozen, resp};
  }
  double signed_reward(double r1) const { return responder_ == Player::kOne ? r1 : -r1; }

  double q_value(const GameState& s, int a_resp, const MixedStrategy& f, int depth) const {
    double q = 0.0;
    for (int b = 0; b < f.size(); ++b) {
      if (f[b] <= 0.0) continue;
      const StepResult r = game_.step(s, joint(a_resp, b));
      double future = 0.0;
      if (!r.next.terminal && depth > 1) future = lookahead_value(r.next, depth - 1);
      q += f[b] * (signed_reward(r.reward1) + game_.discount() * future);
    }
    return q;
  }

  double lookahead_value(const GameState& s, int depth) const {
    const MixedStrategy f = frozen_(s);
    double best = -INFINITY;
    for (int a = 0; a < game_.num_actions(s, responder_); ++a) {
      best = std::max(best, q_value(s, a, f, depth));
    }
    return best;
  }

  int best_action(const GameState& s) const {
    const MixedStrategy f = frozen_(s);
    int best = 0;
    double best_q = -INFINITY;
    for (int a = 0; a < game_.num_actions(s, responder_); ++a) {
      const double q = q_value(s, a, f, lookahead_);
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    return best;
  }

  const MarkovGame& game_;
  const exact::PolicyFn& frozen_;
  Player responder_;
  int lookahead_;
};

double sampled_best_response(const MarkovGame& game, const GameState& s0,
                             const exact::PolicyFn& frozen, Player responder,
                             const EvalOptions& options) {
  const SampledResponder br(game, frozen, responder, options.sampled_lookahead);
  Rng rng(derive_seed(options.seed, responder == Player::kOne ? "br-rollout-1" : "br-rollout-2"));
  double sum = 0.0;
  for (int i = 0; i < options.sampled_rollouts; ++i) sum += br.rollout(s0, rng);
  return sum / options.sampled_rollouts;
}

}  // namespace

EvalRow evaluate_policies(const MarkovGame& game, const exact::PolicyFn& pi1,
                          const exact::PolicyFn& pi2, const EvalOptions& options) {
  options.validate();
  Rng init_rng(derive_seed(options.seed, "eval-initial"));
  const GameState s0 = game.initial_state(init_rng);
  EvalRow row;
  row.seed = options.seed;
  row.exact = exact_evaluation_available(game, options);
  double br2 = 0.0;
  double br1 = 0.0;
  if (row.exact) {
    const exact::ExactOptions eo{options.node_budget};
    br2 = exact::best_response_value(game, s0, pi1, Player::kTwo, eo);
    br1 = exact::best_response_value(game, s0, pi2, Player::kOne, eo);
  } else {
    br2 = sampled_best_response(game, s0, pi1, Player::kTwo, options);
    br1 = sampled_best_response(game, s0, pi2, Player::kOne, options);
  }
  row.brv_p1 = -br2;
  row.brv_p2 = -br1;
  row.exploitability = br1 + br2;
  return row;
}

EvalRow evaluate_policy_network(const MarkovGame& game, const net::Network& net,
                                const EvalOptions& options) {
  options.validate();
  if (net.input_size() != game.encoding_size() ||
      net.actions1() < game.max_actions(Player::kOne) ||
      net.actions2() < game.max_actions(Player::kTwo)) {
    throw InvalidArgument("eval: network shape does not match the game");
  }
  const auto [pi1, pi2] = network_policies(game, net, options);
  EvalRow row = evaluate_policies(game, pi1, pi2, options);
  row.setting = game.name() + (options.mode == PolicyMode::kRaw ? "/raw" : "/mcts");
  row.search_iters = options.mode == PolicyMode::kRaw ? 0 : options.search.n_sim;
  return row;
}

EvalReport exploitability_vs_search_curve(const MarkovGame& game, const net::Network& net,
                                          const std::vector<int>& iters_list,
                                          const std::vector<std::uint64_t>& seeds,
                                          EvalOptions options) {
  options.validate();
  if (iters_list.empty() || seeds.empty()) {
    throw InvalidArgument("eval: iters_list and seeds must be nonempty");
  }
  for (int n : iters_list) {
    if (n < 0) throw InvalidArgument("eval: search budgets must be >= 0 (0 = raw network)");
  }
  EvalReport report;
  const std::size_t total = iters_list.size() * seeds.size();
  report.rows.resize(total);
  const auto run_one = [&](std::size_t idx) {
    EvalOptions o = options;
    const int n = iters_list[idx / seeds.size()];
    const std::uint64_t row_seed = seeds[idx % seeds.size()];
    o.seed = derive_seed(options.seed, "eval-row", row_seed);
    o.mode = n == 0 ? PolicyMode::kRaw : PolicyMode::kMcts;
    if (n > 0) o.search.n_sim = n;
    report.rows[idx] = evaluate_policy_network(game, net, o);
    report.rows[idx].seed = row_seed;
  };
  const int workers = std::min<int>(options.workers, static_cast<int>(total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          try {
            run_one(i);
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

  for (std::size_t b = 0; b < iters_list.size(); ++b) {
    AggregateRow agg;
    agg.search_iters = iters_list[b];
    agg.seeds = static_cast<int>(seeds.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const EvalRow& r = report.rows[b * seeds.size() + k];
      agg.setting = r.setting;
      agg.exact = agg.exact && r.exact;
      sum += r.exploitability;
      agg.mean_brv_p1 += r.brv_p1 / static_cast<double>(seeds.size());
      agg.mean_brv_p2 += r.brv_p2 / static_cast<double>(seeds.size());
    }
    const double n = static_cast<double>(seeds.size());
    agg.mean_exploitability = sum / n;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const double d = report.rows[b * seeds.size() + k].exploitability - agg.mean_exploitability;
      sum_sq += d * d;
    }
    agg.std_exploitability = seeds.size() > 1 ? std::sqrt(sum_sq / (n - 1.0)) : 0.0;
    report.aggregates.push_back(agg);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_eval_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "setting,brv_p1,brv_p2,exploitability,search_iters,seed,evaluation\n";
  for (const auto& r : report.rows) {
    out << r.setting << ',' << fmt(r.brv_p1) << ',' << fmt(r.brv_p2) << ','
        << fmt(r.exploitability) << ',' << r.search_iters << ',' << r.seed << ','
        << (r.exact ? "exact" : "sampled") << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_aggregate_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "setting,search_iters,seeds,mean_exploitability,std_exploitability,mean_brv_p1,"
         "mean_brv_p2,evaluation\n";
  for (const auto& a : report.aggregates) {
    out << a.setting << ',' << a.search_iters << ',' << a.seeds << ','
        << fmt(a.mean_exploitability) << ',' << fmt(a.std_exploitability) << ','
        << fmt(a.mean_brv_p1) << ',' << fmt(a.mean_brv_p2) << ','
        << (a.exact ? "exact" : "sampled") << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_eval_json(const EvalReport& report, const std::string& config_json,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  j["config"] = config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"setting", r.setting},
                         {"brv_p1", r.brv_p1},
                         {"brv_p2", r.brv_p2},
                         {"exploitability", r.exploitability},
                         {"search_iters", r.search_iters},
                         {"seed", r.seed},
                         {"evaluation", r.exact ? "exact" : "sampled"}});
  }
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    j["aggregates"].push_back({{"setting", a.setting},
                               {"search_iters", a.search_iters},
                               {"seeds", a.seeds},
                               {"mean_exploitability", a.mean_exploitability},
                               {"std_exploitability", a.std_exploitability},
                               {"mean_brv_p1", a.mean_brv_p1},
                               {"mean_brv_p2", a.mean_brv_p2},
                               {"evaluation", a.exact ? "exact" : "sampled"}});
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace zerosum::evalx
