// Acceptance checks, one per criterion. Prints one line per criterion:
//   criterion N: PASS|FAIL <detail>
// Usage: acceptance [--criterion N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "zerosum/envs/dubin.hpp"
#include "zerosum/envs/sda.hpp"
#include "zerosum/envs/tabular.hpp"
#include "zerosum/evalx.hpp"
#include "zerosum/evaluator.hpp"
#include "zerosum/exact.hpp"
#include "zerosum/matgame.hpp"
#include "zerosum/mcts.hpp"
#include "zerosum/net.hpp"
#include "zerosum/rng.hpp"
#include "zerosum/train.hpp"

using namespace zerosum;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

PayoffMatrix random_matrix(Rng& rng, int n, int m) {
  std::vector<double> a(static_cast<std::size_t>(n * m));
  for (double& x : a) x = rng.uniform(-1.0, 1.0);
  return PayoffMatrix(n, m, std::move(a));
}

MixedStrategy random_strategy(Rng& rng, int k) {
  std::vector<double> w(k);
  for (double& x : w) x = rng.uniform(0.01, 1.0);
  return MixedStrategy::normalized(std::move(w));
}

Verdict criterion_1() {
  Rng rng(derive_seed(1, "acceptance-lp"));
  double worst_gap = 0.0, worst_exploit = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + rng.index(3), m = 2 + rng.index(3);
    const PayoffMatrix a = random_matrix(rng, n, m);
    const GameSolution lp = solve_lp(a);
    const GameSolution bf = brute_force_solve(a, 0.01);
    worst_gap = std::max(worst_gap, std::abs(lp.value - bf.value));
    worst_exploit =
        std::max(worst_exploit, exploitability_matrix(a, lp.row_strategy, lp.col_strategy));
  }
  return {worst_gap <= 0.01 && worst_exploit <= 1e-8,
          format("max |lp - brute force| %.3g, max lp exploitability %.3g", worst_gap,
                 worst_exploit)};
}

Verdict criterion_2() {
  const PayoffMatrix rps = envs::rock_paper_scissors_matrix();
  double worst_short = 0.0, worst_long = 0.0;
  int improved = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng(derive_seed(2, "acceptance-rm", s));
    RegretMatchingOptions opts;
    opts.initial_row = random_strategy(rng, 3);
    opts.initial_col = random_strategy(rng, 3);
    const GameSolution short_run = regret_matching_solve(rps, 100, opts);
    const GameSolution long_run = regret_matching_solve(rps, 10000, opts);
    const double e100 = exploitability_matrix(rps, short_run.row_strategy, short_run.col_strategy);
    const double e10k = exploitability_matrix(rps, long_run.row_strategy, long_run.col_strategy);
    worst_short = std::max(worst_short, e100);
    worst_long = std::max(worst_long, e10k);
    improved += e10k < e100 ? 1 : 0;
  }
  return {worst_long < 0.05 && worst_short < 0.5 && improved >= 95,
          format("max exploitability T=100 %.4f, T=10000 %.4f; improved in %d/100", worst_short,
                 worst_long, improved)};
}

Verdict criterion_3() {
  Rng rng(derive_seed(3, "acceptance-exact"));
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + rng.index(3), m = 1 + rng.index(3), d = 1 + rng.index(3);
    const envs::RandomTreeGame g(n, m, d, rng.next(), rng.uniform(0.5, 1.0));
    const auto sol = exact::backward_induction(g, g.initial_state());
    const double e = exact::joint_exploitability(
        g, g.initial_state(), exact::policy_from_table(sol.policy, Player::kOne),
        exact::policy_from_table(sol.policy, Player::kTwo));
    worst = std::max(worst, std::abs(e));
  }
  return {worst <= 1e-6, format("max |exploitability| over 50 games %.3g", worst)};
}

Verdict criterion_4() {
  int close = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const envs::RandomTreeGame g(2, 2, 2, derive_seed(4, "acceptance-mcts-game", t));
    const double exact_value = exact::backward_induction(g, g.initial_state()).root_value;
    const UniformEvaluator baseline;
    mcts::SearchConfig cfg;
    cfg.n_sim = 5000;
    const mcts::SearchResult r =
        mcts::run_search(g, g.initial_state(), baseline, cfg, derive_seed(4, "acceptance-mcts", t));
    const double err = std::abs(r.v_root - exact_value);
    worst = std::max(worst, err);
    close += err <= 0.05 ? 1 : 0;
  }
  return {close >= 18, format("%d/20 games within 0.05 (max error %.4f)", close, worst)};
}

Verdict criterion_5() {
  int trials = 0, violations = 0;
  double tightest = 0.0;
  for (int d = 1; d <= 3; ++d) {
    for (double gamma : {0.5, 0.9, 1.0}) {
      for (double eps : {0.1, 1.0}) {
        for (int t = 0; t < 200; ++t) {
          evalx::ErrorTrialConfig cfg;
          cfg.depth = d;
          cfg.gamma = gamma;
          cfg.epsilon = eps;
          cfg.trials = 1;
          cfg.seed = derive_seed(5, "acceptance-bound",
                                 static_cast<std::uint64_t>(((d * 10 + gamma * 10) * 10 + eps * 10) * 1000 + t));
          const auto r = evalx::error_propagation_trial(cfg);
          ++trials;
          violations += r.max_root_error <= r.bound + 1e-12 ? 0 : 1;
          if (r.bound > 0) tightest = std::max(tightest, r.max_root_error / r.bound);
        }
      }
    }
  }
  evalx::ErrorTrialConfig ref;
  ref.depth = 3;
  ref.gamma = 0.9;
  ref.epsilon = 1.0;
  const double bound = evalx::error_propagation_trial(ref).bound;
  const bool exact_bound = std::abs(bound - 0.729) <= 1e-15;
  return {violations == 0 && exact_bound,
          format("%d/%d trials within bound (max error/bound %.3f); bound(0.9,3,1) = %.17g",
                 trials - violations, trials, tightest, bound)};
}

Verdict criterion_6() {
  Rng rng(derive_seed(6, "acceptance-grad"));
  double worst = 0.0;
  for (int arch = 0; arch < 10; ++arch) {
    net::NetConfig c;
    c.input_size = 2 + rng.index(5);
    c.actions1 = 2 + rng.index(4);
    c.actions2 = 2 + rng.index(4);
    c.trunk_widths.assign(1 + rng.index(2), 0);
    for (int& w : c.trunk_widths) w = 3 + rng.index(6);
    c.head_widths.assign(rng.index(2), 0);
    for (int& w : c.head_widths) w = 2 + rng.index(5);
    c.binning = net::ValueBinning::symmetric(1.0 + rng.uniform(), 5 + rng.index(20));
    c.seed = rng.next();
    c.output_init_scale = 1.0;
    net::Network nw(c);

    std::vector<net::TrainingSample> batch(3);
    for (auto& s : batch) {
      s.x.resize(c.input_size);
      for (double& x : s.x) x = rng.uniform(-1.0, 1.0);
      s.pi1 = random_strategy(rng, c.actions1).vector();
      s.pi2 = random_strategy(rng, c.actions2).vector();
      s.v1 = rng.uniform(-1.0, 1.0);
    }
    const double l2 = 1e-3;
    const net::LossAndGrads lg = net::loss_grads(nw, batch, l2);

    // Flatten parameter and gradient arrays for coordinate access.
    std::vector<double*> theta;
    nw.mutable_params().for_each_array([&](const net::ArrayRef& a) {
      for (int i = 0; i < a.rows * a.cols; ++i) theta.push_back(a.data + i);
    });
    std::vector<double> grad;
    lg.grads.for_each_array([&](const net::ConstArrayRef& a) {
      for (int i = 0; i < a.rows * a.cols; ++i) grad.push_back(a.data[i]);
    });
    for (int k = 0; k < 20; ++k) {
      const int i = rng.index(static_cast<int>(theta.size()));
      const double saved = *theta[i];
      const double h = 1e-5;
      *theta[i] = saved + h;
      const double up = net::loss(nw, batch, l2).total;
      *theta[i] = saved - h;
      const double down = net::loss(nw, batch, l2).total;
      *theta[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return {worst < 1e-4, format("max relative error %.3g over 10 architectures x 20 coordinates", worst)};
}

Verdict criterion_7() {
  const net::ValueBinning binning = net::ValueBinning::symmetric(1.0, 51, 0.75);
  const double w = binning.width();
  Rng rng(derive_seed(7, "acceptance-hlgauss"));
  double worst_sum = 0.0, worst_mean = 0.0, worst_at = 0.0;
  int outside = 0, outside_in_range = 0;
  for (int t = 0; t < 1000; ++t) {
    // Include out-of-range inputs so the clamp is exercised.
    const double v = rng.uniform(-1.2, 1.2);
    const MixedStrategy target = net::hl_gauss_target(v, binning);
    double sum = 0.0, mean = 0.0;
    for (int b = 0; b < binning.bins; ++b) {
      sum += target[b];
      mean += target[b] * binning.center(b);
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    const double err = std::abs(mean - std::clamp(v, binning.v_min, binning.v_max));
    if (err > worst_mean) {
      worst_mean = err;
      worst_at = v;
    }
    if (err > w / 2) {
      ++outside;
      if (v >= binning.v_min && v <= binning.v_max) ++outside_in_range;
    }
  }
  return {worst_sum <= 1e-12 && outside == 0,
          format("max |sum - 1| %.3g; expectation error max %.3f bin widths (at v = %.3f), "
                 "%d/1000 beyond half a bin (%d with v inside the support)",
                 worst_sum, worst_mean / w, worst_at, outside, outside_in_range)};
}

train::TrainConfig smoke_train_config() {
  train::TrainConfig cfg;
  cfg.n_iter = 10;
  cfg.n_ep = 8;
  cfg.batch_size = 64;
  cfg.grad_steps = 32;
  cfg.search.n_sim = 64;
  cfg.net.trunk_widths = {32};
  cfg.net.head_widths = {};
  cfg.seed = derive_seed(8, "acceptance-train");
  return cfg;
}

net::Network smoke_trained(const MarkovGame& game) {
  train::TrainConfig cfg = smoke_train_config();
  cfg.horizon = game.horizon();
  return train::train_loop(game, cfg).net;
}

Verdict criterion_8() {
  const GamePtr g = envs::make_tabular_toy("asym22(1)");
  const GameState s0 = g->initial_state();
  const double uniform = exact::joint_exploitability(*g, s0, exact::uniform_policy(*g, Player::kOne),
                                                     exact::uniform_policy(*g, Player::kTwo));
  const auto start = std::chrono::steady_clock::now();
  const net::Network trained = smoke_trained(*g);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const evalx::EvalRow row = evalx::evaluate_policy_network(*g, trained, evalx::EvalOptions{});
  return {row.exploitability < 0.2,
          format("uniform exploitability %.4f, trained raw-network exploitability %.4f (%.1fs)",
                 uniform, row.exploitability, seconds)};
}

Verdict criterion_9() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"matching_pennies(3)", "asym22(2)"}) {
    const GamePtr g = envs::make_tabular_toy(name);
    const net::Network trained = smoke_trained(*g);
    evalx::EvalOptions opts;
    opts.mode = evalx::PolicyMode::kMcts;
    opts.seed = derive_seed(9, "acceptance-curve");
    std::vector<std::uint64_t> seeds(8);
    for (int i = 0; i < 8; ++i) seeds[i] = i;
    const evalx::EvalReport r = evalx::exploitability_vs_search_curve(*g, trained, {8, 512}, seeds, opts);
    const double low = r.aggregates[0].mean_exploitability;
    const double high = r.aggregates[1].mean_exploitability;
    pass = pass && high <= low;
    detail += format("%s: N_sim=8 %.4f +/- %.4f, N_sim=512 %.4f +/- %.4f; ", name, low,
                     r.aggregates[0].std_exploitability, high, r.aggregates[1].std_exploitability);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Verdict criterion_10() {
  bool pass = true;
  std::string detail;

  // Dubin arcs: heading change u*dt exactly, straight-line displacement V*dt.
  Rng rng(derive_seed(10, "acceptance-dubin"));
  double worst_heading = 0.0, worst_straight = 0.0, worst_radius = 0.0;
  for (int t = 0; t < 200; ++t) {
    const envs::DubinPose p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3)};
    const double v = rng.uniform(0.5, 2.0), dt = rng.uniform(0.05, 1.0);
    const double u = rng.uniform(0.2, 1.5) * (rng.index(2) ? 1 : -1);
    const envs::DubinPose turned = envs::dubin_integrate(p, v, u, dt);
    worst_heading = std::max(
        worst_heading, std::abs(envs::wrap_angle(turned.heading - p.heading - u * dt)));
    // Both endpoints lie on the circle of radius V/|u| around the turn center.
    const double r = v / std::abs(u);
    const double side = u > 0 ? 1.0 : -1.0;
    const double cx = p.x - side * r * std::sin(p.heading), cy = p.y + side * r * std::cos(p.heading);
    worst_radius = std::max(worst_radius, std::abs(std::hypot(turned.x - cx, turned.y - cy) - r));
    const envs::DubinPose straight = envs::dubin_integrate(p, v, 0.0, dt);
    worst_straight = std::max(worst_straight, std::abs(std::hypot(straight.x - p.x, straight.y - p.y) - v * dt));
    worst_straight = std::max(worst_straight, std::abs(envs::wrap_angle(straight.heading - p.heading)));
  }
  const bool dubin_ok = worst_heading <= 1e-12 && worst_straight <= 1e-12 && worst_radius <= 1e-6;
  pass = pass && dubin_ok;
  detail += format("dubin heading err %.2g, straight err %.2g, radius err %.2g; ", worst_heading,
                   worst_straight, worst_radius);

  // Circular-orbit radius over one period at dt = period/100.
  const double mu = 398600.4418;
  double worst_orbit = 0.0;
  for (double r0 : {6800.0, 7000.0, 7500.0}) {
    const double period = 2.0 * std::numbers::pi * std::sqrt(r0 * r0 * r0 / mu);
    envs::Satellite s{{r0, 0.0}, {0.0, std::sqrt(mu / r0)}};
    for (int i = 0; i < 100; ++i) {
      s = envs::propagate_two_body(s, mu, period / 100.0, 1);
      worst_orbit = std::max(worst_orbit, std::abs(std::hypot(s.position.x, s.position.y) - r0) / r0);
    }
  }
  pass = pass && worst_orbit < 1e-6;
  detail += format("orbit radius drift %.2g; ", worst_orbit);

  // Geometric truth table.
  const double re = 6371.0, half = 30.0 * std::numbers::pi / 180.0;
  const envs::Vec2 sun{1.0, 0.0};
  struct Row {
    const char* name;
    bool got;
    bool want;
  };
  const Row table[] = {
      {"eclipse on shadow axis", envs::sda_eclipse({-7000, 0}, sun, re), true},
      {"eclipse sun side", envs::sda_eclipse({7000, 0}, sun, re), false},
      {"eclipse inside shadow cylinder", envs::sda_eclipse({-7000, 6000}, sun, re), true},
      {"eclipse beside shadow cylinder", envs::sda_eclipse({-7000, 6500}, sun, re), false},
      {"occluded through the origin", envs::sda_los_occluded({7000, 0}, {-7000, 0}, re), true},
      {"occluded swapped", envs::sda_los_occluded({-7000, 0}, {7000, 0}, re), true},
      {"clear short chord", envs::sda_los_occluded({7000, 0}, {7000, 500}, re), false},
      {"clear collinear outward", envs::sda_los_occluded({7000, 0}, {9000, 0}, re), false},
      {"sun blinded looking sunward", envs::sda_sun_blinded({0, 7000}, {1000, 7000}, sun, half), true},
      {"not blinded looking away", envs::sda_sun_blinded({0, 7000}, {-1000, 7000}, sun, half), false},
      {"not blinded at 45 degrees", envs::sda_sun_blinded({0, 0}, {1, 1}, sun, half), false},
  };
  int wrong = 0;
  for (const Row& row : table) {
    if (row.got != row.want) {
      ++wrong;
      detail += format("[%s wrong] ", row.name);
    }
  }
  pass = pass && wrong == 0;
  detail += format("predicate table %d/%d", static_cast<int>(std::size(table)) - wrong,
                   static_cast<int>(std::size(table)));
  return {pass, detail};
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion_11() {
  const GamePtr g = envs::make_tabular_toy("asym22(2)");
  train::TrainConfig cfg = smoke_train_config();
  cfg.n_iter = 2;
  cfg.horizon = 2;
  const net::Network trained = train::train_loop(*g, cfg).net;

  const auto dir = std::filesystem::temp_directory_path() /
                   ("zerosum_acceptance_" + std::to_string(derive_seed(11, "dir") % 1000000));
  std::filesystem::create_directories(dir);
  net::save_checkpoint(trained, dir / "a.saz");
  const net::Network reloaded = net::load_checkpoint(dir / "a.saz");
  net::save_checkpoint(reloaded, dir / "b.saz");
  const bool bytes_equal = read_bytes(dir / "a.saz") == read_bytes(dir / "b.saz");

  evalx::EvalOptions opts;
  opts.mode = evalx::PolicyMode::kMcts;
  const std::vector<std::uint64_t> seeds = {0, 1, 2};
  const evalx::EvalReport before = evalx::exploitability_vs_search_curve(*g, trained, {0, 16}, seeds, opts);
  const evalx::EvalReport after = evalx::exploitability_vs_search_curve(*g, reloaded, {0, 16}, seeds, opts);
  bool same = before.rows.size() == after.rows.size();
  for (std::size_t i = 0; same && i < before.rows.size(); ++i) {
    const auto& a = before.rows[i];
    const auto& b = after.rows[i];
    same = a.setting == b.setting && a.brv_p1 == b.brv_p1 && a.brv_p2 == b.brv_p2 &&
           a.exploitability == b.exploitability && a.search_iters == b.search_iters &&
           a.seed == b.seed && a.exact == b.exact;
  }
  std::filesystem::remove_all(dir);
  return {bytes_equal && same, format("write-read-write byte identical: %s; reloaded report identical: %s",
                                      bytes_equal ? "yes" : "no", same ? "yes" : "no")};
}

const std::vector<std::function<Verdict()>> kCriteria = {
    criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
      return 2;
    }
  }
  if (which.empty()) {
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) which.push_back(i);
  }
  int failures = 0;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = kCriteria[n - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s %s [%.1fs]\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                seconds);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
