#include "zerosum/game.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "zerosum/error.hpp"

namespace zerosum {

std::size_t GameStateHash::operator()(const GameState& s) const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(s.step) * 2 + (s.terminal ? 1 : 0));
  for (double d : s.data) {
    // Treat -0.0 and 0.0 alike so equal states hash equally.
    const double v = d == 0.0 ? 0.0 : d;
    h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  }
  return static_cast<std::size_t>(h);
}

MarkovGame::MarkovGame(int horizon, double discount)
    : horizon_(horizon), discount_(discount) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) {
    throw InvalidArgument("gamma must lie in [0, 1], got " + std::to_string(discount));
  }
}

GameState MarkovGame::initial_state() const {
  Rng rng(0);
  return initial_state(rng);
}

StepResult MarkovGame::step(const GameState& s, JointAction a) const {
  if (s.terminal) throw InvalidArgument(name() + ": cannot step a terminal state");
  if (a.a1 < 0 || a.a1 >= num_actions(s, Player::kOne) || a.a2 < 0 ||
      a.a2 >= num_actions(s, Player::kTwo)) {
    throw InvalidArgument(name() + ": action index out of range");
  }
  StepResult r = apply(s, a);
  r.next.step = s.step + 1;
  if (r.next.step >= horizon_) r.terminal = true;
  r.next.terminal = r.terminal;
  if (!std::isfinite(r.reward1)) throw SolverFailure(name() + ": non-finite reward");
  return r;
}

double MarkovGame::value_scale() const {
  double scale = 0.0;
  double g = 1.0;
  for (int t = 0; t < horizon_; ++t) {
    scale += g * max_abs_reward();
    g *= discount_;
  }
  return scale;
}

}  // namespace zerosum
