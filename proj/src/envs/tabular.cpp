#include "zerosum/envs/tabular.hpp"

#include <cmath>
#include <cctype>
#include <regex>
#include <sstream>

#include "zerosum/error.hpp"

namespace zerosum::envs {

// ---------------------------------------------------------------------------
// RepeatedMatrixGame

RepeatedMatrixGame::RepeatedMatrixGame(std::string name, PayoffMatrix stage, int horizon,
                                       double discount)
    : MarkovGame(horizon, discount), name_(std::move(name)), stage_(std::move(stage)) {}

GameState RepeatedMatrixGame::initial_state(Rng&) const { return GameState{}; }

std::vector<double> RepeatedMatrixGame::encode(const GameState& s) const {
  std::vector<double> x(horizon(), 0.0);
  if (s.step < horizon()) x[s.step] = 1.0;
  return x;
}

StepResult RepeatedMatrixGame::apply(const GameState& s, JointAction a) const {
  StepResult r;
  r.next = s;
  r.reward1 = stage_(a.a1, a.a2);
  return r;
}

// ---------------------------------------------------------------------------
// GridPursuitGame

GridPursuitGame::GridPursuitGame(int size, int horizon, double discount)
    : MarkovGame(horizon, discount), size_(size) {
  if (size < 2) throw InvalidArgument("grid_pursuit: size must be >= 2");
}

std::string GridPursuitGame::name() const {
  return "grid_pursuit(" + std::to_string(size_) + "," + std::to_string(horizon()) + ")";
}

GameState GridPursuitGame::initial_state(Rng&) const {
  const double mid = size_ / 2;
  return GameState{{0.0, 0.0, mid, mid}, 0, false};
}

std::vector<double> GridPursuitGame::encode(const GameState& s) const {
  std::vector<double> x(encoding_size(), 0.0);
  const int cells = size_ * size_;
  const auto cell = [&](double cx, double cy) {
    return static_cast<int>(cy) * size_ + static_cast<int>(cx);
  };
  x[cell(s.data[0], s.data[1])] = 1.0;
  x[cells + cell(s.data[2], s.data[3])] = 1.0;
  if (s.step < horizon()) x[2 * cells + s.step] = 1.0;
  return x;
}

namespace {

constexpr int kDx[5] = {0, 1, -1, 0, 0};
constexpr int kDy[5] = {0, 0, 0, 1, -1};

}  // namespace

StepResult GridPursuitGame::apply(const GameState& s, JointAction a) const {
  const auto wrap = [&](int v) { return ((v % size_) + size_) % size_; };
  const int px = static_cast<int>(s.data[0]);
  const int py = static_cast<int>(s.data[1]);
  const int ex = static_cast<int>(s.data[2]);
  const int ey = static_cast<int>(s.data[3]);
  const int npx = wrap(px + kDx[a.a1]);
  const int npy = wrap(py + kDy[a.a1]);
  const int nex = wrap(ex + kDx[a.a2]);
  const int ney = wrap(ey + kDy[a.a2]);
  const bool same_cell = npx == nex && npy == ney;
  const bool swapped = npx == ex && npy == ey && nex == px && ney == py;
  StepResult r;
  r.next = GameState{{double(npx), double(npy), double(nex), double(ney)}, s.step, false};
  r.terminal = same_cell || swapped;
  r.reward1 = r.terminal ? 1.0 : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// RandomTreeGame

RandomTreeGame::RandomTreeGame(int rows, int cols, int depth, std::uint64_t seed,
                               double discount, double reward_lo, double reward_hi)
    : MarkovGame(depth, discount),
      rows_(rows),
      cols_(cols),
      seed_(seed),
      reward_lo_(reward_lo),
      reward_hi_(reward_hi) {
  if (rows < 1 || cols < 1) throw InvalidArgument("random_tree: action counts must be >= 1");
  if (!(reward_lo <= reward_hi)) throw InvalidArgument("random_tree: empty reward range");
  const double leaves = std::pow(double(rows) * cols, depth);
  if (leaves > 1e15) throw InvalidArgument("random_tree: tree too large to index");
}

std::string RandomTreeGame::name() const {
  std::ostringstream os;
  os << "random_tree(" << rows_ << "," << cols_ << "," << horizon() << "," << seed_ << ")";
  return os.str();
}

GameState RandomTreeGame::initial_state(Rng&) const { return GameState{{0.0}, 0, false}; }

int RandomTreeGame::encoding_size() const {
  // One slot per internal node.
  const long branching = static_cast<long>(rows_) * cols_;
  long total = 0;
  long level = 1;
  for (int d = 0; d < horizon(); ++d) {
    total += level;
    level *= branching;
    if (total > (1L << 20)) throw InvalidArgument("random_tree: too many nodes to one-hot encode");
  }
  return static_cast<int>(total);
}

std::vector<double> RandomTreeGame::encode(const GameState& s) const {
  std::vector<double> x(encoding_size(), 0.0);
  const auto id = static_cast<std::size_t>(s.data[0]);
  if (id < x.size()) x[id] = 1.0;
  return x;
}

double RandomTreeGame::max_abs_reward() const {
  return std::max(std::abs(reward_lo_), std::abs(reward_hi_));
}

double RandomTreeGame::reward(std::uint64_t node, JointAction a) const {
  const std::uint64_t h =
      mix64(mix64(mix64(seed_) ^ node) + static_cast<std::uint64_t>(a.a1 * cols_ + a.a2));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return reward_lo_ + (reward_hi_ - reward_lo_) * u;
}

StepResult RandomTreeGame::apply(const GameState& s, JointAction a) const {
  const auto id = static_cast<std::uint64_t>(s.data[0]);
  const std::uint64_t branching = static_cast<std::uint64_t>(rows_) * cols_;
  const std::uint64_t child = id * branching + static_cast<std::uint64_t>(a.a1 * cols_ + a.a2) + 1;
  StepResult r;
  r.next = GameState{{static_cast<double>(child)}, s.step, false};
  r.reward1 = reward(id, a);
  return r;
}

// ---------------------------------------------------------------------------
// Factory

PayoffMatrix matching_pennies_matrix() { return PayoffMatrix{{1, -1}, {-1, 1}}; }

PayoffMatrix rock_paper_scissors_matrix() {
  return PayoffMatrix{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
}

PayoffMatrix asym22_matrix() { return PayoffMatrix{{2, -1}, {-1, 1}}; }

namespace {

std::vector<long long> parse_args(const std::string& args, const std::string& spec) {
  std::vector<long long> out;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("make_tabular_toy: bad argument '" + item + "' in " + spec);
    }
  }
  return out;
}

}  // namespace

GamePtr make_tabular_toy(const std::string& spec, double discount) {
  static const std::regex kPattern(R"(\s*([a-z_0-9]+)\s*\(([^)]*)\)\s*)");
  std::smatch match;
  if (!std::regex_match(spec, match, kPattern)) {
    throw InvalidArgument("make_tabular_toy: cannot parse '" + spec + "'");
  }
  const std::string name = match[1];
  const std::vector<long long> args = parse_args(match[2], spec);
  const auto expect = [&](std::size_t count) {
    if (args.size() != count) {
      throw InvalidArgument("make_tabular_toy: " + name + " takes " + std::to_string(count) +
                            " argument(s)");
    }
  };
  if (name == "matching_pennies") {
    expect(1);
    return std::make_shared<RepeatedMatrixGame>(spec, matching_pennies_matrix(),
                                                static_cast<int>(args[0]), discount);
  }
  if (name == "rps") {
    expect(1);
    return std::make_shared<RepeatedMatrixGame>(spec, rock_paper_scissors_matrix(),
                                                static_cast<int>(args[0]), discount);
  }
  if (name == "asym22") {
    expect(1);
    return std::make_shared<RepeatedMatrixGame>(spec, asym22_matrix(),
                                                static_cast<int>(args[0]), discount);
  }
  if (name == "grid_pursuit") {
    expect(2);
    return std::make_shared<GridPursuitGame>(static_cast<int>(args[0]),
                                             static_cast<int>(args[1]), discount);
  }
  if (name == "random_tree") {
    expect(4);
    return std::make_shared<RandomTreeGame>(static_cast<int>(args[0]),
                                            static_cast<int>(args[1]),
                                            static_cast<int>(args[2]),
                                            static_cast<std::uint64_t>(args[3]), discount);
  }
  throw InvalidArgument("make_tabular_toy: unknown game '" + name + "'");
}

}  // namespace zerosum::envs
