#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zerosum/evalx.hpp"
#include "zerosum/game.hpp"
#include "zerosum/mcts.hpp"
#include "zerosum/net.hpp"
#include "zerosum/train.hpp"

namespace zerosum::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

struct EvalSection {
  evalx::PolicyMode mode = evalx::PolicyMode::kMcts;
  std::vector<int> iters_list;
  std::vector<std::uint64_t> seeds;
  evalx::EvalOptions options;
};

struct BenchSection {
  int searches = 4;
  int rm_solves = 2000;
};

// Every section resolved and validated, defaults applied.
struct RunConfig {
  std::string env_name;
  GamePtr game;
  train::TrainConfig train;
  EvalSection eval;
  BenchSection bench;
  long node_budget = 1'000'000;
  bool probe_exploitability = false;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int workers = 1;
  // The merged configuration tree as YAML text.
  std::string resolved_yaml;
};

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> sets;  // "dotted.key=value"
};

// Merges the file (may be empty for all defaults) and overrides over the
// defaults. Throws InvalidArgument naming the offending key.
RunConfig resolve_config(const std::string& yaml_text, const Overrides& overrides);

// The full default configuration tree as YAML text.
std::string default_config_yaml();

// Entry point shared by the executable; returns one of the exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zerosum::cli
