#include <doctest.h>

#include <cmath>
#include <functional>

#include "zerosum/envs/tabular.hpp"
#include "zerosum/error.hpp"
#include "zerosum/evaluator.hpp"
#include "zerosum/exact.hpp"
#include "zerosum/mcts.hpp"

using namespace zerosum;
using namespace zerosum::mcts;

namespace {

// Uniform priors and a fixed value everywhere.
class ConstantEvaluator final : public Evaluator {
 public:
  explicit ConstantEvaluator(double v, std::vector<double> p1 = {}, std::vector<double> p2 = {})
      : v_(v), p1_(std::move(p1)), p2_(std::move(p2)) {}
  Evaluation evaluate(const MarkovGame& game, const GameState& s) const override {
    Evaluation e;
    const int n = game.num_actions(s, Player::kOne), m = game.num_actions(s, Player::kTwo);
    e.p1 = p1_.empty() ? std::vector<double>(n, 1.0 / n) : p1_;
    e.p2 = p2_.empty() ? std::vector<double>(m, 1.0 / m) : p2_;
    e.value = v_;
    return e;
  }

 private:
  double v_;
  std::vector<double> p1_, p2_;
};

SearchNode manual_node(const PayoffMatrix& a_bar) {
  SearchNode n;
  n.rows = a_bar.rows();
  n.cols = a_bar.cols();
  n.reward.assign(a_bar.entries().begin(), a_bar.entries().end());
  n.child_value.assign(n.reward.size(), 0.0);
  n.visits.assign(n.reward.size(), 0);
  n.prior1.assign(n.rows, 1.0 / n.rows);
  n.prior2.assign(n.cols, 1.0 / n.cols);
  n.expanded = true;
  return n;
}

void check_visit_conservation(const SearchNode& node) {
  if (!node.expanded) return;
  long sum = 0;
  for (long v : node.visits) sum += v;
  CHECK(sum == node.total_visits);
  for (const auto& c : node.children) check_visit_conservation(*c);
}

}  // namespace

TEST_SUITE("mcts") {
  TEST_CASE("config validation") {
    SearchConfig c;
    c.n_sim = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SearchConfig{};
    c.c_puct = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SearchConfig{};
    c.rm_iters = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  }

  TEST_CASE("one-shot asymmetric game with an exact oracle") {
    const GamePtr g = envs::make_tabular_toy("asym22(1)");
    const auto sol = exact::backward_induction(*g, g->initial_state());
    const TableEvaluator oracle(sol.values);
    SearchConfig cfg;
    cfg.n_sim = 2000;
    const SearchResult r = run_search(*g, g->initial_state(), oracle, cfg, 1);
    CHECK(std::abs(r.v_root - 0.2) <= 0.05);
  }

  TEST_CASE("a single simulation solves the expansion payoffs") {
    const envs::RandomTreeGame g(2, 3, 2, 4, 0.9);
    const ConstantEvaluator eval(0.25);
    SearchConfig cfg;
    cfg.n_sim = 1;
    Search search(g, eval, cfg, 0);
    const SearchResult r = search.run(g.initial_state());
    CHECK(search.root().expanded);
    CHECK(search.root().total_visits == 0);
    std::vector<double> a(6);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 3; ++k) a[j * 3 + k] = g.reward(0, {j, k}) + 0.9 * 0.25;
    }
    const GameSolution expected = regret_matching_solve(PayoffMatrix(2, 3, a), cfg.root_rm_iters);
    CHECK(r.pi1 == expected.row_strategy);
    CHECK(r.pi2 == expected.col_strategy);
    CHECK(r.v_root == expected.value);
  }

  TEST_CASE("repeated matching pennies stays near zero") {
    const GamePtr g = envs::make_tabular_toy("matching_pennies(3)");
    const UniformEvaluator eval;
    SearchConfig cfg;
    cfg.n_sim = 500;
    const SearchResult r = run_search(*g, g->initial_state(), eval, cfg, 3);
    CHECK(std::abs(r.v_root) <= 0.05);
  }

  TEST_CASE("terminal nodes are worth zero") {
    const GamePtr g = envs::make_tabular_toy("asym22(1)");
    const ConstantEvaluator eval(5.0);
    Search search(*g, eval, SearchConfig{}, 0);
    SearchNode terminal;
    terminal.state = g->step(g->initial_state(), {0, 0}).next;
    terminal.terminal = true;
    CHECK(search.simulate(terminal) == 0.0);
  }

  TEST_CASE("horizon cutoff leaves take the evaluator value") {
    const envs::RandomTreeGame g(2, 2, 3, 1);
    const ConstantEvaluator eval(0.7);
    SearchConfig cfg;
    cfg.horizon = 1;
    Search search(g, eval, cfg, 0);
    search.reset(g.initial_state());
    search.simulate(search.root());
    SearchNode& child = *search.root().children[0];
    CHECK(child.depth == 1);
    CHECK(search.simulate(child) == doctest::Approx(0.7));
    CHECK_FALSE(child.expanded);
  }

  TEST_CASE("zero rewards and zero values expand to zero") {
    const envs::RepeatedMatrixGame g("zero", PayoffMatrix(2, 3, 0.0), 3, 1.0);
    const UniformEvaluator eval;
    Search search(g, eval, SearchConfig{}, 0);
    search.reset(g.initial_state());
    CHECK(search.simulate(search.root()) == 0.0);
  }

  TEST_CASE("expansion fills priors, rewards, and child values") {
    const GamePtr g = envs::make_tabular_toy("rps(2)");
    const UniformEvaluator uniform;
    Search s1(*g, uniform, SearchConfig{}, 0);
    s1.reset(g->initial_state());
    s1.expand_node(s1.root());
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) CHECK(s1.root().joint_prior(j, k) == doctest::Approx(1.0 / 9.0));
    }
    CHECK(s1.root().reward[s1.root().index({1, 0})] == 1.0);
    CHECK_THROWS_AS(s1.expand_node(s1.root()), InvalidArgument);

    const ConstantEvaluator skewed(0.0, {0.5, 0.3, 0.2}, {0.1, 0.1, 0.8});
    Search s2(*g, skewed, SearchConfig{}, 0);
    s2.reset(g->initial_state());
    s2.expand_node(s2.root());
    double total = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) total += s2.root().joint_prior(j, k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("terminal children get zero value") {
    const GamePtr g = envs::make_tabular_toy("matching_pennies(1)");
    const ConstantEvaluator eval(5.0);
    Search search(*g, eval, SearchConfig{}, 0);
    search.reset(g->initial_state());
    search.expand_node(search.root());
    for (double v : search.root().child_value) CHECK(v == 0.0);
    for (const auto& c : search.root().children) CHECK(c->terminal);
  }

  TEST_CASE("selection on a fresh flat node is uniform") {
    const SearchNode n = manual_node(PayoffMatrix(3, 3, 0.0));
    const auto [x, y] = selection_strategies(n, SearchConfig{}, 1.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(x[i] == doctest::Approx(1.0 / 3.0));
      CHECK(y[i] == doctest::Approx(1.0 / 3.0));
    }
  }

  TEST_CASE("a visited joint action loses exploration mass") {
    SearchNode n = manual_node(PayoffMatrix(2, 2, 0.0));
    n.visits = {1, 0, 0, 0};
    n.total_visits = 1;
    const auto [x, y] = selection_strategies(n, SearchConfig{}, 1.0);
    CHECK(x[0] <= 0.5);
    CHECK(y[0] <= 0.5);
  }

  TEST_CASE("selection without exploration solves the estimated game") {
    const SearchNode n = manual_node(PayoffMatrix{{2, -1}, {-1, 1}});
    SearchConfig cfg;
    cfg.c_puct = 0.0;
    cfg.rm_iters = 10000;
    const auto [x, y] = selection_strategies(n, cfg, 1.0);
    CHECK(std::abs(x[0] - 0.4) <= 0.05);
    CHECK(std::abs(y[0] - 0.4) <= 0.05);
  }

  TEST_CASE("selection is invariant to shifting every reward") {
    Rng rng(21);
    SearchNode a = manual_node(PayoffMatrix(3, 2, 0.0));
    for (double& r : a.reward) r = rng.uniform(-1.0, 1.0);
    for (long& v : a.visits) v = rng.index(4);
    a.total_visits = 0;
    for (long v : a.visits) a.total_visits += v;
    a.prior1 = {0.2, 0.5, 0.3};
    a.prior2 = {0.6, 0.4};
    SearchNode b = manual_node(PayoffMatrix(3, 2, 0.0));
    b.reward = a.reward;
    for (double& r : b.reward) r += 1.75;
    b.visits = a.visits;
    b.total_visits = a.total_visits;
    b.prior1 = a.prior1;
    b.prior2 = a.prior2;
    const auto [xa, ya] = selection_strategies(a, SearchConfig{}, 0.9);
    const auto [xb, yb] = selection_strategies(b, SearchConfig{}, 0.9);
    for (int i = 0; i < 3; ++i) CHECK(xa[i] == doctest::Approx(xb[i]).epsilon(1e-12));
    for (int i = 0; i < 2; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-12));
  }

  TEST_CASE("backup on a single joint action") {
    const envs::RepeatedMatrixGame g("one", PayoffMatrix{{1.0}}, 3, 0.5);
    const UniformEvaluator eval;
    Search search(g, eval, SearchConfig{}, 0);
    search.reset(g.initial_state());
    search.expand_node(search.root());
    CHECK(search.backup(search.root(), {0, 0}, 2.0) == doctest::Approx(2.0));
    CHECK(search.root().visits[0] == 1);
    CHECK(search.root().total_visits == 1);
  }

  TEST_CASE("backup solves the estimated matrix") {
    const GamePtr g = envs::make_tabular_toy("asym22(1)");
    const UniformEvaluator eval;
    SearchConfig cfg;
    cfg.rm_iters = 10000;
    Search search(*g, eval, cfg, 0);
    search.reset(g->initial_state());
    search.expand_node(search.root());
    CHECK(std::abs(search.backup(search.root(), {0, 0}, 0.0) - 0.2) <= 0.02);
  }

  TEST_CASE("visit counts are conserved") {
    const envs::RandomTreeGame g(3, 2, 3, 8);
    const UniformEvaluator eval;
    SearchConfig cfg;
    cfg.n_sim = 300;
    Search search(g, eval, cfg, 5);
    search.run(g.initial_state());
    // The first simulation only expands the root.
    CHECK(search.root().total_visits == cfg.n_sim - 1);
    check_visit_conservation(search.root());
  }

  TEST_CASE("root policy extraction") {
    const envs::RepeatedMatrixGame chain("one", PayoffMatrix{{3.0}}, 2, 1.0);
    const UniformEvaluator eval;
    SearchConfig cfg;
    cfg.n_sim = 5;
    const SearchResult one = run_search(chain, chain.initial_state(), eval, cfg, 0);
    CHECK(one.pi1 == MixedStrategy({1.0}));
    CHECK(one.pi2 == MixedStrategy({1.0}));
    CHECK(one.v_root == doctest::Approx(6.0));

    const GamePtr mp = envs::make_tabular_toy("matching_pennies(1)");
    const SearchResult r = run_search(*mp, mp->initial_state(), eval, cfg, 0);
    CHECK(std::abs(r.pi1[0] - 0.5) <= 0.02);
    CHECK(std::abs(r.pi2[0] - 0.5) <= 0.02);

    const GamePtr asym = envs::make_tabular_toy("asym22(1)");
    cfg.root_rm_iters = 10000;
    const SearchResult s = run_search(*asym, asym->initial_state(), eval, cfg, 0);
    CHECK(std::abs(s.pi1[0] - 0.4) <= 0.02);
    CHECK(std::abs(s.pi2[0] - 0.4) <= 0.02);
  }

  TEST_CASE("search is deterministic for a fixed seed") {
    const envs::RandomTreeGame g(3, 3, 3, 12, 0.9);
    const UniformEvaluator eval;
    SearchConfig cfg;
    cfg.n_sim = 200;
    const SearchResult a = run_search(g, g.initial_state(), eval, cfg, 77);
    const SearchResult b = run_search(g, g.initial_state(), eval, cfg, 77);
    CHECK(a.pi1 == b.pi1);
    CHECK(a.pi2 == b.pi2);
    CHECK(a.v_root == b.v_root);
  }

  TEST_CASE("terminal roots are rejected") {
    const GamePtr g = envs::make_tabular_toy("asym22(1)");
    const UniformEvaluator eval;
    const GameState done = g->step(g->initial_state(), {0, 0}).next;
    CHECK_THROWS_AS(run_search(*g, done, eval, SearchConfig{}, 0), InvalidArgument);
  }

  TEST_CASE("search approaches the exact value on small random games") {
    int close = 0;
    for (int t = 0; t < 5; ++t) {
      const envs::RandomTreeGame g(2, 2, 2, derive_seed(31, "mcts-conv", t), 1.0);
      const double exact_value = exact::backward_induction(g, g.initial_state()).root_value;
      const UniformEvaluator eval;
      SearchConfig cfg;
      cfg.n_sim = 3000;
      const SearchResult r = run_search(g, g.initial_state(), eval, cfg, t);
      close += std::abs(r.v_root - exact_value) <= 0.05 ? 1 : 0;
    }
    CHECK(close >= 4);
  }
}
