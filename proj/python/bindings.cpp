#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "zerosum/envs/dubin.hpp"
#include "zerosum/envs/sda.hpp"
#include "zerosum/envs/tabular.hpp"
#include "zerosum/error.hpp"
#include "zerosum/evalx.hpp"
#include "zerosum/evaluator.hpp"
#include "zerosum/exact.hpp"
#include "zerosum/matgame.hpp"
#include "zerosum/mcts.hpp"
#include "zerosum/net.hpp"
#include "zerosum/train.hpp"

namespace py = pybind11;
using namespace zerosum;

namespace {

PayoffMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw InvalidArgument("payoff matrix must be nonempty");
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows.front().size());
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(n * m));
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m) throw InvalidArgument("payoff matrix rows differ in length");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return PayoffMatrix(n, m, std::move(entries));
}

py::tuple solution_tuple(const GameSolution& s) {
  return py::make_tuple(s.value, s.row_strategy.vector(), s.col_strategy.vector());
}

mcts::SearchConfig search_config(int n_sim, double c_puct, int rm_iters, int root_rm_iters,
                                 int horizon) {
  mcts::SearchConfig c;
  c.n_sim = n_sim;
  c.c_puct = c_puct;
  c.rm_iters = rm_iters;
  c.root_rm_iters = root_rm_iters;
  c.horizon = horizon;
  return c;
}

py::dict row_dict(const evalx::EvalRow& r) {
  py::dict d;
  d["setting"] = r.setting;
  d["brv_p1"] = r.brv_p1;
  d["brv_p2"] = r.brv_p2;
  d["exploitability"] = r.exploitability;
  d["search_iters"] = r.search_iters;
  d["seed"] = r.seed;
  d["exact"] = r.exact;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simultaneous-move zero-sum game solvers, search, and training";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

  // Matrix games
  m.def("solve_lp", [](const std::vector<std::vector<double>>& a) { return solution_tuple(solve_lp(to_matrix(a))); },
        py::arg("matrix"), "Exact equilibrium: (value, x, y).");
  m.def(
      "regret_matching",
      [](const std::vector<std::vector<double>>& a, long iterations) {
        return solution_tuple(regret_matching_solve(to_matrix(a), iterations));
      },
      py::arg("matrix"), py::arg("iterations"), "Average strategies after simultaneous regret matching.");
  m.def(
      "exploitability",
      [](const std::vector<std::vector<double>>& a, std::vector<double> x, std::vector<double> y) {
        return exploitability_matrix(to_matrix(a), MixedStrategy(std::move(x)), MixedStrategy(std::move(y)));
      },
      py::arg("matrix"), py::arg("x"), py::arg("y"));

  // Games
  py::class_<MarkovGame, std::shared_ptr<MarkovGame>>(m, "Game")
      .def_property_readonly("name", &MarkovGame::name)
      .def_property_readonly("horizon", &MarkovGame::horizon)
      .def_property_readonly("discount", &MarkovGame::discount)
      .def_property_readonly("tabular", &MarkovGame::tabular)
      .def_property_readonly("encoding_size", &MarkovGame::encoding_size)
      .def("max_actions", [](const MarkovGame& g, int player) {
        return g.max_actions(player == 1 ? Player::kOne : Player::kTwo);
      });

  m.def(
      "make_toy",
      [](const std::string& spec, double discount) {
        return std::const_pointer_cast<MarkovGame>(envs::make_tabular_toy(spec, discount));
      },
      py::arg("spec"), py::arg("discount") = 1.0,
      "matching_pennies(H), rps(H), asym22(H), grid_pursuit(k,H), random_tree(n,m,D,seed)");
  m.def(
      "make_dubin",
      [](int horizon, double discount) {
        envs::DubinConfig c;
        c.horizon = horizon;
        return std::shared_ptr<MarkovGame>(std::make_shared<envs::DubinTagGame>(c, discount));
      },
      py::arg("horizon") = 20, py::arg("discount") = 0.99);
  m.def(
      "make_sda",
      [](int horizon, double discount) {
        envs::SdaConfig c;
        c.horizon = horizon;
        return std::shared_ptr<MarkovGame>(std::make_shared<envs::SdaCustodyGame>(c, discount));
      },
      py::arg("horizon") = 24, py::arg("discount") = 0.99);

  // Exact solving
  m.def(
      "solve_exact",
      [](const MarkovGame& g, long node_budget) {
        const GameState s0 = g.initial_state();
        const exact::ExactSolution sol = exact::backward_induction(g, s0, {node_budget});
        const auto& root = sol.policy.at(s0);
        return py::make_tuple(sol.root_value, root.pi1.vector(), root.pi2.vector());
      },
      py::arg("game"), py::arg("node_budget") = 1'000'000,
      "Backward induction: (root value, player 1 root strategy, player 2 root strategy).");
  m.def(
      "uniform_exploitability",
      [](const MarkovGame& g) {
        return exact::joint_exploitability(g, g.initial_state(), exact::uniform_policy(g, Player::kOne),
                                           exact::uniform_policy(g, Player::kTwo));
      },
      py::arg("game"));

  // Search
  m.def(
      "search",
      [](const MarkovGame& g, int n_sim, double c_puct, int rm_iters, int root_rm_iters, int horizon,
         std::uint64_t seed, bool exact_values) {
        const mcts::SearchConfig cfg = search_config(n_sim, c_puct, rm_iters, root_rm_iters, horizon);
        const GameState s0 = g.initial_state();
        const UniformEvaluator uniform;
        std::unique_ptr<TableEvaluator> table;
        if (exact_values) {
          table = std::make_unique<TableEvaluator>(exact::backward_induction(g, s0).values);
        }
        const Evaluator& eval = table ? static_cast<const Evaluator&>(*table) : uniform;
        const mcts::SearchResult r = mcts::run_search(g, s0, eval, cfg, seed);
        return py::make_tuple(r.v_root, r.pi1.vector(), r.pi2.vector());
      },
      py::arg("game"), py::arg("n_sim") = 128, py::arg("c_puct") = 2.0, py::arg("rm_iters") = 32,
      py::arg("root_rm_iters") = 512, py::arg("horizon") = 20, py::arg("seed") = 0,
      py::arg("exact_values") = false,
      "Search from the initial state with uniform priors and zero values (or exact values "
      "for tabular games): (v_root, pi1, pi2).");

  // Network
  m.def(
      "hl_gauss_target",
      [](double v, double v_min, double v_max, int bins, double sigma_ratio) {
        net::ValueBinning b;
        b.v_min = v_min;
        b.v_max = v_max;
        b.bins = bins;
        b.sigma = sigma_ratio * b.width();
        return net::hl_gauss_target(v, b).vector();
      },
      py::arg("v"), py::arg("v_min") = -1.0, py::arg("v_max") = 1.0, py::arg("bins") = 51,
      py::arg("sigma_ratio") = 0.75);

  py::class_<net::Network>(m, "Network")
      .def(py::init([](const MarkovGame& g, std::vector<int> trunk, std::vector<int> heads,
                       std::uint64_t seed, double output_init_scale) {
             net::NetConfig base;
             base.trunk_widths = std::move(trunk);
             base.head_widths = std::move(heads);
             base.seed = seed;
             base.output_init_scale = output_init_scale;
             return net::Network(train::net_config_for(g, base));
           }),
           py::arg("game"), py::arg("trunk_widths") = std::vector<int>{64, 64},
           py::arg("head_widths") = std::vector<int>{64}, py::arg("seed") = 0,
           py::arg("output_init_scale") = 0.0)
      .def_property_readonly("input_size", &net::Network::input_size)
      .def_property_readonly("actions1", &net::Network::actions1)
      .def_property_readonly("actions2", &net::Network::actions2)
      .def("forward",
           [](const net::Network& n, const std::vector<double>& x) {
             const net::NetworkOutput o = n.forward(x);
             return py::make_tuple(o.p1, o.p2, o.value_dist, o.value);
           })
      .def("initial_output",
           [](const net::Network& n, const MarkovGame& g) {
             const net::NetworkOutput o = n.forward(g.encode(g.initial_state()));
             return py::make_tuple(o.p1, o.p2, o.value);
           })
      .def("to_bytes", [](const net::Network& n) { return py::bytes(net::serialize(n)); })
      .def_static("from_bytes",
                  [](const py::bytes& b) { return net::deserialize(std::string(b)); })
      .def("save", [](const net::Network& n, const std::filesystem::path& p) { net::save_checkpoint(n, p); })
      .def_static("load", &net::load_checkpoint);

  // Training
  m.def("compute_returns",
        [](const std::vector<double>& r, double gamma, double bootstrap) {
          return train::compute_returns(r, gamma, bootstrap);
        },
        py::arg("rewards"), py::arg("gamma"), py::arg("bootstrap") = 0.0);
  m.def(
      "train",
      [](const MarkovGame& g, int n_iter, int n_ep, int n_sim, int batch_size, int grad_steps,
         std::vector<int> trunk, std::vector<int> heads, std::uint64_t seed, int workers) {
        train::TrainConfig cfg;
        cfg.n_iter = n_iter;
        cfg.n_ep = n_ep;
        cfg.horizon = g.horizon();
        cfg.search.n_sim = n_sim;
        cfg.batch_size = batch_size;
        cfg.grad_steps = grad_steps;
        cfg.net.trunk_widths = std::move(trunk);
        cfg.net.head_widths = std::move(heads);
        cfg.seed = seed;
        cfg.workers = workers;
        train::TrainResult r = [&] {
          py::gil_scoped_release release;
          return train::train_loop(g, cfg);
        }();
        py::list metrics;
        for (const auto& it : r.metrics) {
          py::dict d;
          d["iteration"] = it.iteration;
          d["total_loss"] = it.total_loss;
          d["mean_policy_loss"] = it.mean_policy_loss;
          d["mean_value_loss"] = it.mean_value_loss;
          d["buffer_fill"] = it.buffer_fill;
          metrics.append(d);
        }
        return py::make_tuple(std::move(r.net), metrics);
      },
      py::arg("game"), py::arg("n_iter") = 10, py::arg("n_ep") = 8, py::arg("n_sim") = 64,
      py::arg("batch_size") = 64, py::arg("grad_steps") = 32,
      py::arg("trunk_widths") = std::vector<int>{32}, py::arg("head_widths") = std::vector<int>{},
      py::arg("seed") = 0, py::arg("workers") = 1, "Self-play training: (network, metrics).");

  // Evaluation
  m.def(
      "evaluate_network",
      [](const MarkovGame& g, const net::Network& n, int n_sim, std::uint64_t seed) {
        evalx::EvalOptions opts;
        opts.seed = seed;
        if (n_sim > 0) {
          opts.mode = evalx::PolicyMode::kMcts;
          opts.search.n_sim = n_sim;
        }
        const evalx::EvalRow row = [&] {
          py::gil_scoped_release release;
          return evalx::evaluate_policy_network(g, n, opts);
        }();
        return row_dict(row);
      },
      py::arg("game"), py::arg("network"), py::arg("n_sim") = 0, py::arg("seed") = 0,
      "Best-response values and joint exploitability; n_sim 0 evaluates the raw heads.");
  m.def(
      "error_trial",
      [](int depth, int rows, int cols, double gamma, double epsilon, int trials, std::uint64_t seed) {
        evalx::ErrorTrialConfig c;
        c.depth = depth;
        c.rows = rows;
        c.cols = cols;
        c.gamma = gamma;
        c.epsilon = epsilon;
        c.trials = trials;
        c.seed = seed;
        const evalx::ErrorTrialResult r = evalx::error_propagation_trial(c);
        return py::make_tuple(r.max_root_error, r.bound, r.pass);
      },
      py::arg("depth") = 3, py::arg("rows") = 2, py::arg("cols") = 2, py::arg("gamma") = 0.9,
      py::arg("epsilon") = 1.0, py::arg("trials") = 1, py::arg("seed") = 0,
      "Frontier perturbation trial: (max root error, bound, pass).");
}
