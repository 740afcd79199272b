#include "zerosum/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "zerosum/envs/dubin.hpp"
#include "zerosum/envs/sda.hpp"
#include "zerosum/envs/tabular.hpp"
#include "zerosum/error.hpp"
#include "zerosum/evaluator.hpp"
#include "zerosum/exact.hpp"

namespace zerosum::cli {

namespace {

int default_workers() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

YAML::Node defaults_tree() {
  YAML::Node root;
  root["seed"] = 0;
  root["workers"] = default_workers();
  root["out"] = "runs";

  YAML::Node env;
  env["name"] = "asym22";
  env["horizon"] = YAML::Node(YAML::NodeType::Null);
  env["gamma"] = YAML::Node(YAML::NodeType::Null);
  env["grid_size"] = 3;
  env["tree"]["rows"] = 2;
  env["tree"]["cols"] = 2;
  env["tree"]["seed"] = 0;
  const envs::DubinConfig d;
  YAML::Node dubin;
  dubin["v_att"] = d.v_att;
  dubin["v_def"] = d.v_def;
  dubin["u_max"] = d.u_max;
  dubin["dt"] = d.dt;
  dubin["goal_x"] = d.goal_x;
  dubin["goal_y"] = d.goal_y;
  dubin["goal_radius"] = d.goal_radius;
  dubin["capture_radius"] = d.capture_radius;
  dubin["arena_scale"] = d.arena_scale;
  dubin["attacker_start_radius"] = d.attacker_start_radius;
  dubin["defender_start_radius"] = d.defender_start_radius;
  env["dubin"] = dubin;
  const envs::SdaConfig s;
  YAML::Node sda;
  sda["delta_v"] = s.delta_v;
  sda["dt"] = s.dt;
  sda["rk4_substeps"] = s.rk4_substeps;
  sda["earth_radius"] = s.earth_radius;
  sda["mu"] = s.mu;
  sda["sun_exclusion_half_angle"] = s.sun_exclusion_half_angle;
  sda["sun_period"] = s.sun_period;
  sda["sun_angle"] = s.sun_angle;
  sda["observer_radius"] = s.observer_radius;
  sda["target_radius"] = s.target_radius;
  sda["target_lead_angle"] = s.target_lead_angle;
  sda["lead_angle_jitter"] = s.lead_angle_jitter;
  env["sda"] = sda;
  root["env"] = env;

  const mcts::SearchConfig sc;
  root["search"]["n_sim"] = sc.n_sim;
  root["search"]["c_puct"] = sc.c_puct;
  root["search"]["rm_iters"] = sc.rm_iters;
  root["search"]["root_rm_iters"] = sc.root_rm_iters;
  root["search"]["horizon"] = sc.horizon;

  const net::NetConfig nc;
  root["net"]["trunk_widths"] = nc.trunk_widths;
  root["net"]["head_widths"] = nc.head_widths;
  root["net"]["bins"] = nc.binning.bins;
  root["net"]["sigma_ratio"] = 0.75;
  root["net"]["output_init_scale"] = nc.output_init_scale;

  const train::TrainConfig tc;
  root["train"]["n_iter"] = tc.n_iter;
  root["train"]["n_ep"] = tc.n_ep;
  root["train"]["horizon"] = YAML::Node(YAML::NodeType::Null);
  root["train"]["buffer_capacity"] = tc.buffer_capacity;
  root["train"]["batch_size"] = tc.batch_size;
  root["train"]["grad_steps"] = tc.grad_steps;
  root["train"]["l2"] = tc.l2;
  root["train"]["learning_rate"] = tc.learning_rate;
  root["train"]["optimizer"] = "adam";
  root["train"]["bootstrap_truncated"] = tc.bootstrap_truncated;
  root["train"]["probe_exploitability"] = false;

  const evalx::EvalOptions eo;
  root["eval"]["iters_list"] = std::vector<int>{0, 8, 32, 128};
  root["eval"]["seeds"] = std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7};
  root["eval"]["force_sampled"] = eo.force_sampled;
  root["eval"]["exact_max_horizon"] = eo.exact_max_horizon;
  root["eval"]["exact_max_actions"] = eo.exact_max_actions;
  root["eval"]["sampled_lookahead"] = eo.sampled_lookahead;
  root["eval"]["sampled_rollouts"] = eo.sampled_rollouts;

  root["exact"]["node_budget"] = 1000000;

  const BenchSection bs;
  root["bench"]["searches"] = bs.searches;
  root["bench"]["rm_solves"] = bs.rm_solves;
  return root;
}

void merge_into(YAML::Node dst, const YAML::Node& src, const std::string& prefix) {
  if (!src.IsMap()) {
    throw InvalidArgument("config " + (prefix.empty() ? std::string("root") : "key '" + prefix + "'") +
                          ": expected a mapping");
  }
  for (const auto& kv : src) {
    const std::string key = kv.first.as<std::string>();
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const YAML::Node existing = dst[key];
    if (!existing.IsDefined()) throw InvalidArgument("unknown config key '" + path + "'");
    if (existing.IsMap()) {
      merge_into(dst[key], kv.second, path);
    } else {
      if (kv.second.IsMap()) throw InvalidArgument("config key '" + path + "': expected a value");
      dst[key] = YAML::Clone(kv.second);
    }
  }
}

void apply_set(YAML::Node root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw InvalidArgument("--set " + path + ": " + e.what());
  }
  // Build a nested mapping and merge it so unknown keys are rejected the
  // same way as in the file.
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  YAML::Node patch = value;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    YAML::Node wrapper;
    wrapper[*it] = patch;
    patch = wrapper;
  }
  merge_into(root, patch, "");
}

YAML::Node lookup(const YAML::Node& root, const std::string& path) {
  YAML::Node node = YAML::Clone(root);
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) node = node[p];
  return node;
}

template <typename T>
T get(const YAML::Node& root, const std::string& path) {
  const YAML::Node node = lookup(root, path);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidArgument("config key '" + path + "': invalid value");
  }
}

template <typename Fn>
void in_section(const std::string& section, Fn&& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("config section '" + section + "': " + e.what());
  }
}

int default_horizon(const std::string& env) {
  if (env == "dubin") return envs::DubinConfig{}.horizon;
  if (env == "sda") return envs::SdaConfig{}.horizon;
  if (env == "grid_pursuit") return 6;
  if (env == "random_tree") return 3;
  return 1;
}

GamePtr build_game(const YAML::Node& root, const std::string& name, int horizon, double gamma) {
  if (name == "dubin") {
    envs::DubinConfig c;
    c.v_att = get<double>(root, "env.dubin.v_att");
    c.v_def = get<double>(root, "env.dubin.v_def");
    c.u_max = get<double>(root, "env.dubin.u_max");
    c.dt = get<double>(root, "env.dubin.dt");
    c.goal_x = get<double>(root, "env.dubin.goal_x");
    c.goal_y = get<double>(root, "env.dubin.goal_y");
    c.goal_radius = get<double>(root, "env.dubin.goal_radius");
    c.capture_radius = get<double>(root, "env.dubin.capture_radius");
    c.arena_scale = get<double>(root, "env.dubin.arena_scale");
    c.attacker_start_radius = get<double>(root, "env.dubin.attacker_start_radius");
    c.defender_start_radius = get<double>(root, "env.dubin.defender_start_radius");
    c.horizon = horizon;
    return std::make_shared<envs::DubinTagGame>(c, gamma);
  }
  if (name == "sda") {
    envs::SdaConfig c;
    c.delta_v = get<double>(root, "env.sda.delta_v");
    c.dt = get<double>(root, "env.sda.dt");
    c.rk4_substeps = get<int>(root, "env.sda.rk4_substeps");
    c.earth_radius = get<double>(root, "env.sda.earth_radius");
    c.mu = get<double>(root, "env.sda.mu");
    c.sun_exclusion_half_angle = get<double>(root, "env.sda.sun_exclusion_half_angle");
    c.sun_period = get<double>(root, "env.sda.sun_period");
    c.sun_angle = get<double>(root, "env.sda.sun_angle");
    c.observer_radius = get<double>(root, "env.sda.observer_radius");
    c.target_radius = get<double>(root, "env.sda.target_radius");
    c.target_lead_angle = get<double>(root, "env.sda.target_lead_angle");
    c.lead_angle_jitter = get<double>(root, "env.sda.lead_angle_jitter");
    c.horizon = horizon;
    return std::make_shared<envs::SdaCustodyGame>(c, gamma);
  }
  std::string spec;
  if (name == "grid_pursuit") {
    spec = "grid_pursuit(" + std::to_string(get<int>(root, "env.grid_size")) + "," +
           std::to_string(horizon) + ")";
  } else if (name == "random_tree") {
    spec = "random_tree(" + std::to_string(get<int>(root, "env.tree.rows")) + "," +
           std::to_string(get<int>(root, "env.tree.cols")) + "," + std::to_string(horizon) + "," +
           std::to_string(get<std::uint64_t>(root, "env.tree.seed")) + ")";
  } else if (name == "matching_pennies" || name == "rps" || name == "asym22") {
    spec = name + "(" + std::to_string(horizon) + ")";
  } else {
    throw InvalidArgument("config key 'env.name': unknown environment '" + name + "'");
  }
  return envs::make_tabular_toy(spec, gamma);
}

}  // namespace

std::string default_config_yaml() {
  YAML::Emitter e;
  e << defaults_tree();
  return e.c_str();
}

RunConfig resolve_config(const std::string& yaml_text, const Overrides& overrides) {
  YAML::Node root = defaults_tree();
  YAML::Node file;
  try {
    file = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("config parse error: ") + e.what());
  }
  if (file.IsDefined() && !file.IsNull()) merge_into(root, file, "");
  for (const auto& s : overrides.sets) apply_set(root, s);
  if (overrides.out) root["out"] = overrides.out->string();
  if (overrides.seed) root["seed"] = *overrides.seed;
  if (overrides.workers) root["workers"] = *overrides.workers;

  RunConfig cfg;
  cfg.seed = get<std::uint64_t>(root, "seed");
  cfg.workers = get<int>(root, "workers");
  if (cfg.workers < 1) throw InvalidArgument("config key 'workers': must be >= 1");
  cfg.out = get<std::string>(root, "out");

  cfg.env_name = get<std::string>(root, "env.name");
  const bool continuous = cfg.env_name == "dubin" || cfg.env_name == "sda";
  if (lookup(root, "env.horizon").IsNull()) root["env"]["horizon"] = default_horizon(cfg.env_name);
  if (lookup(root, "env.gamma").IsNull()) root["env"]["gamma"] = continuous ? 0.99 : 1.0;
  const int horizon = get<int>(root, "env.horizon");
  const double gamma = get<double>(root, "env.gamma");
  if (horizon < 1) throw InvalidArgument("config key 'env.horizon': must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("config key 'env.gamma': gamma must lie in [0, 1]");
  }
  in_section("env", [&] { cfg.game = build_game(root, cfg.env_name, horizon, gamma); });

  mcts::SearchConfig search;
  search.n_sim = get<int>(root, "search.n_sim");
  search.c_puct = get<double>(root, "search.c_puct");
  search.rm_iters = get<int>(root, "search.rm_iters");
  search.root_rm_iters = get<int>(root, "search.root_rm_iters");
  search.horizon = get<int>(root, "search.horizon");
  in_section("search", [&] { search.validate(); });

  net::NetConfig nc;
  nc.trunk_widths = get<std::vector<int>>(root, "net.trunk_widths");
  nc.head_widths = get<std::vector<int>>(root, "net.head_widths");
  nc.binning.bins = get<int>(root, "net.bins");
  const double sigma_ratio = get<double>(root, "net.sigma_ratio");
  if (!(sigma_ratio > 0.0)) throw InvalidArgument("config key 'net.sigma_ratio': must be > 0");
  nc.binning.sigma = sigma_ratio * nc.binning.width();
  nc.output_init_scale = get<double>(root, "net.output_init_scale");
  in_section("net", [&] {
    nc = train::net_config_for(*cfg.game, nc);
    nc.validate();
  });

  train::TrainConfig& tc = cfg.train;
  tc.n_iter = get<int>(root, "train.n_iter");
  tc.n_ep = get<int>(root, "train.n_ep");
  if (lookup(root, "train.horizon").IsNull()) root["train"]["horizon"] = horizon;
  tc.horizon = get<int>(root, "train.horizon");
  const long capacity = get<long>(root, "train.buffer_capacity");
  if (capacity < 1) throw InvalidArgument("config key 'train.buffer_capacity': must be >= 1");
  tc.buffer_capacity = static_cast<std::size_t>(capacity);
  tc.batch_size = get<int>(root, "train.batch_size");
  tc.grad_steps = get<int>(root, "train.grad_steps");
  tc.l2 = get<double>(root, "train.l2");
  tc.learning_rate = get<double>(root, "train.learning_rate");
  const std::string opt = get<std::string>(root, "train.optimizer");
  if (opt == "adam") {
    tc.optimizer = net::OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    tc.optimizer = net::OptimizerKind::kSgd;
  } else {
    throw InvalidArgument("config key 'train.optimizer': expected adam or sgd");
  }
  tc.bootstrap_truncated = get<bool>(root, "train.bootstrap_truncated");
  cfg.probe_exploitability = get<bool>(root, "train.probe_exploitability");
  tc.seed = cfg.seed;
  tc.workers = cfg.workers;
  tc.search = search;
  tc.net = nc;
  in_section("train", [&] { tc.validate(); });

  cfg.node_budget = get<long>(root, "exact.node_budget");
  if (cfg.node_budget < 1) throw InvalidArgument("config key 'exact.node_budget': must be >= 1");

  EvalSection& ev = cfg.eval;
  ev.iters_list = get<std::vector<int>>(root, "eval.iters_list");
  ev.seeds = get<std::vector<std::uint64_t>>(root, "eval.seeds");
  if (ev.iters_list.empty()) throw InvalidArgument("config key 'eval.iters_list': must be nonempty");
  if (ev.seeds.empty()) throw InvalidArgument("config key 'eval.seeds': must be nonempty");
  for (int n : ev.iters_list) {
    if (n < 0) throw InvalidArgument("config key 'eval.iters_list': budgets must be >= 0");
  }
  ev.options.search = search;
  ev.options.seed = derive_seed(cfg.seed, "eval");
  ev.options.node_budget = cfg.node_budget;
  ev.options.force_sampled = get<bool>(root, "eval.force_sampled");
  ev.options.exact_max_horizon = get<int>(root, "eval.exact_max_horizon");
  ev.options.exact_max_actions = get<int>(root, "eval.exact_max_actions");
  ev.options.sampled_lookahead = get<int>(root, "eval.sampled_lookahead");
  ev.options.sampled_rollouts = get<int>(root, "eval.sampled_rollouts");
  ev.options.workers = cfg.workers;
  in_section("eval", [&] { ev.options.validate(); });

  cfg.bench.searches = get<int>(root, "bench.searches");
  cfg.bench.rm_solves = get<int>(root, "bench.rm_solves");
  if (cfg.bench.searches < 1) throw InvalidArgument("config key 'bench.searches': must be >= 1");
  if (cfg.bench.rm_solves < 1) throw InvalidArgument("config key 'bench.rm_solves': must be >= 1");

  YAML::Emitter e;
  e << root;
  cfg.resolved_yaml = std::string(e.c_str()) + "\n";
  return cfg;
}

namespace {

void prepare_output(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream echo(cfg.out / "config.resolved.yaml");
  echo << cfg.resolved_yaml;
  if (!echo) throw Error("cannot write " + (cfg.out / "config.resolved.yaml").string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["resolved_yaml"] = cfg.resolved_yaml;
  j["env"] = cfg.game->name();
  j["seed"] = cfg.seed;
  return j;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const MarkovGame& game = *cfg.game;
  std::ofstream csv(cfg.out / "metrics.csv");
  if (!csv) throw Error("cannot write " + (cfg.out / "metrics.csv").string());
  csv << "iteration,wall_seconds,mean_policy_loss,mean_value_loss,total_loss,buffer_fill,brv_p1,"
         "brv_p2,exploitability\n";
  train::TrainHooks hooks;
  hooks.checkpoint_dir = cfg.out;
  evalx::EvalOptions probe_opts = cfg.eval.options;
  probe_opts.mode = evalx::PolicyMode::kRaw;
  if (cfg.probe_exploitability && evalx::exact_evaluation_available(game, probe_opts)) {
    hooks.probe = [&](const net::Network& net, train::IterationMetrics& m) {
      const evalx::EvalRow row = evalx::evaluate_policy_network(game, net, probe_opts);
      m.brv_p1 = row.brv_p1;
      m.brv_p2 = row.brv_p2;
      m.exploitability = row.exploitability;
    };
  }
  hooks.on_iteration = [&](const train::IterationMetrics& m) {
    csv << m.iteration << ',' << fmt(m.wall_seconds) << ',' << fmt(m.mean_policy_loss) << ','
        << fmt(m.mean_value_loss) << ',' << fmt(m.total_loss) << ',' << m.buffer_fill << ','
        << opt_fmt(m.brv_p1) << ',' << opt_fmt(m.brv_p2) << ',' << opt_fmt(m.exploitability)
        << '\n';
    csv.flush();
    out << "iteration " << m.iteration << ": loss " << m.total_loss << " buffer " << m.buffer_fill;
    if (m.exploitability) out << " exploitability " << *m.exploitability;
    out << '\n';
  };
  train::train_loop(game, cfg.train, hooks);
  if (!csv) throw Error("write failed: metrics.csv");
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& out) {
  const net::Network net = net::load_checkpoint(checkpoint);
  const MarkovGame& game = *cfg.game;
  if (net.input_size() != game.encoding_size() ||
      net.actions1() < game.max_actions(Player::kOne) ||
      net.actions2() < game.max_actions(Player::kTwo)) {
    throw InvalidArgument("checkpoint shape does not match environment '" + game.name() + "'");
  }
  const evalx::EvalReport report = evalx::exploitability_vs_search_curve(
      game, net, cfg.eval.iters_list, cfg.eval.seeds, cfg.eval.options);
  evalx::write_eval_csv(report, cfg.out / "eval.csv");
  evalx::write_aggregate_csv(report, cfg.out / "eval_summary.csv");
  evalx::write_eval_json(report, config_json(cfg).dump(), cfg.out / "eval.json");
  for (const auto& a : report.aggregates) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s n_sim=%d exploitability %.6f +/- %.6f (%s)\n",
                  a.setting.c_str(), a.search_iters, a.mean_exploitability, a.std_exploitability,
                  a.exact ? "exact" : "sampled");
    out << line;
  }
  return kExitOk;
}

std::string strategy_text(const MixedStrategy& s) {
  std::string text = "[";
  for (int i = 0; i < s.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%.6f", i ? ", " : "", s[i]);
    text += buf;
  }
  return text + "]";
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const MarkovGame& game = *cfg.game;
  const GameState s0 = game.initial_state();
  const exact::ExactSolution sol = exact::backward_induction(game, s0, {cfg.node_budget});
  char line[64];
  std::snprintf(line, sizeof(line), "value %.6f\n", sol.root_value);
  out << line;
  const exact::StageStrategies& root = sol.policy.at(s0);
  out << "player 1 " << strategy_text(root.pi1) << '\n';
  out << "player 2 " << strategy_text(root.pi2) << '\n';

  std::vector<std::pair<GameState, double>> entries(sol.values.begin(), sol.values.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.first.step != b.first.step) return a.first.step < b.first.step;
    if (a.first.data != b.first.data) return a.first.data < b.first.data;
    return a.first.terminal < b.first.terminal;
  });
  nlohmann::json j;
  j["env"] = game.name();
  j["root_value"] = sol.root_value;
  j["states"] = nlohmann::json::array();
  for (const auto& [s, v] : entries) {
    nlohmann::json e{{"data", s.data}, {"step", s.step}, {"terminal", s.terminal}, {"value", v}};
    if (auto it = sol.policy.find(s); it != sol.policy.end()) {
      e["pi1"] = it->second.pi1.vector();
      e["pi2"] = it->second.pi2.vector();
    }
    j["states"].push_back(e);
  }
  std::ofstream f(cfg.out / "values.json");
  f << j.dump(2) << '\n';
  if (!f) throw Error("cannot write " + (cfg.out / "values.json").string());
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  const MarkovGame& game = *cfg.game;
  net::NetConfig nc = cfg.train.net;
  nc.seed = derive_seed(cfg.seed, "net");
  const net::Network net(nc);
  const NetworkEvaluator evaluator(net);
  Rng rng(derive_seed(cfg.seed, "bench"));

  long nodes = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < cfg.bench.searches; ++i) {
    const GameState s0 = game.initial_state(rng);
    mcts::Search search(game, evaluator, cfg.train.search,
                        derive_seed(cfg.seed, "bench-search", static_cast<std::uint64_t>(i)));
    search.run(s0);
    nodes += search.node_count();
  }
  const double search_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const int n = game.max_actions(Player::kOne);
  const int m = game.max_actions(Player::kTwo);
  std::vector<PayoffMatrix> matrices;
  for (int i = 0; i < 16; ++i) {
    std::vector<double> a(static_cast<std::size_t>(n * m));
    for (double& x : a) x = rng.uniform(-1.0, 1.0);
    matrices.emplace_back(n, m, std::move(a));
  }
  double checksum = 0.0;
  const auto t1 = std::chrono::steady_clock::now();
  for (int i = 0; i < cfg.bench.rm_solves; ++i) {
    checksum += regret_matching_solve(matrices[i % matrices.size()], cfg.train.search.rm_iters).value;
  }
  const double rm_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

  const double sims = static_cast<double>(cfg.bench.searches) * cfg.train.search.n_sim;
  nlohmann::json j;
  j["env"] = game.name();
  j["searches"] = cfg.bench.searches;
  j["n_sim"] = cfg.train.search.n_sim;
  j["node_count"] = nodes;
  j["search_seconds"] = search_seconds;
  j["sims_per_sec"] = sims / std::max(search_seconds, 1e-9);
  j["rm_solves"] = cfg.bench.rm_solves;
  j["rm_iters"] = cfg.train.search.rm_iters;
  j["rm_seconds"] = rm_seconds;
  j["rm_solves_per_sec"] = cfg.bench.rm_solves / std::max(rm_seconds, 1e-9);
  j["rm_checksum"] = checksum;
  out << j.dump(2) << '\n';
  std::ofstream f(cfg.out / "bench.json");
  f << j.dump(2) << '\n';
  if (!f) throw Error("cannot write " + (cfg.out / "bench.json").string());
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simultaneous-move zero-sum search and training"};
  app.require_subcommand(1);
  std::string config_path;
  std::string checkpoint;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> sets;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "YAML config file");
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Global seed");
    cmd->add_option("--set", sets, "Override a config key (key=value), repeatable");
    cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* train_cmd = app.add_subcommand("train", "Self-play training");
  CLI::App* eval_cmd = app.add_subcommand("eval", "Exploitability of a checkpoint");
  CLI::App* solve_cmd = app.add_subcommand("solve", "Exact backward induction (tabular games)");
  CLI::App* bench_cmd = app.add_subcommand("bench", "Search and regret-matching throughput");
  for (CLI::App* cmd : {train_cmd, eval_cmd, solve_cmd, bench_cmd}) add_common(cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  CLI::App* cmd = app.get_subcommands().front();
  RunConfig cfg;
  try {
    Overrides ov;
    ov.sets = sets;
    if (cmd->count("--out")) ov.out = out_dir;
    if (cmd->count("--seed")) ov.seed = seed;
    if (cmd->count("--workers")) ov.workers = workers;
    cfg = resolve_config(config_path.empty() ? std::string() : read_file(config_path), ov);
    if (cmd == solve_cmd && !cfg.game->tabular()) {
      throw InvalidArgument("solve: tabular required (environment '" + cfg.game->name() + "')");
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    prepare_output(cfg);
    if (cmd == train_cmd) return cmd_train(cfg, out);
    if (cmd == eval_cmd) return cmd_eval(cfg, checkpoint, out);
    if (cmd == solve_cmd) return cmd_solve(cfg, out);
    return cmd_bench(cfg, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace zerosum::cli
