#include "zerosum/envs/dubin.hpp"

#include <cmath>
#include <numbers>

#include "zerosum/error.hpp"

namespace zerosum::envs {

void DubinConfig::validate() const {
  if (!(v_att > 0.0) || !(v_def > 0.0)) throw InvalidArgument("dubin: speeds must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dubin: dt must be positive");
  if (!(u_max >= 0.0)) throw InvalidArgument("dubin: u_max must be non-negative");
  if (goal_radius != 1.0) throw InvalidArgument("dubin: goal_radius is fixed at 1");
  if (!(capture_radius > 0.0)) throw InvalidArgument("dubin: capture_radius must be positive");
  if (horizon < 1) throw InvalidArgument("dubin: horizon must be >= 1");
  if (!(arena_scale > 0.0)) throw InvalidArgument("dubin: arena_scale must be positive");
}

double wrap_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  t -= std::numbers::pi;
  // fmod round-off can land exactly on +pi.
  if (t >= std::numbers::pi) t -= kTwoPi;
  return t;
}

DubinPose dubin_integrate(const DubinPose& pose, double speed, double turn_rate, double dt) {
  DubinPose out;
  const double theta_end = pose.heading + turn_rate * dt;
  if (turn_rate == 0.0) {
    out.x = pose.x + speed * dt * std::cos(pose.heading);
    out.y = pose.y + speed * dt * std::sin(pose.heading);
  } else {
    const double radius = speed / turn_rate;
    out.x = pose.x + radius * (std::sin(theta_end) - std::sin(pose.heading));
    out.y = pose.y - radius * (std::cos(theta_end) - std::cos(pose.heading));
  }
  out.heading = wrap_angle(theta_end);
  return out;
}

DubinTagGame::DubinTagGame(DubinConfig config, double discount)
    : MarkovGame(config.horizon, discount), config_(config) {
  config_.validate();
}

GameState DubinTagGame::make_state(const DubinPose& a, const DubinPose& d, int step) {
  return GameState{{a.x, a.y, wrap_angle(a.heading), d.x, d.y, wrap_angle(d.heading)}, step,
                   false};
}

DubinPose DubinTagGame::attacker(const GameState& s) {
  return DubinPose{s.data[0], s.data[1], s.data[2]};
}

DubinPose DubinTagGame::defender(const GameState& s) {
  return DubinPose{s.data[3], s.data[4], s.data[5]};
}

double DubinTagGame::turn_rate(int action) const {
  return (action - 1) * config_.u_max;
}

GameState DubinTagGame::initial_state(Rng& rng) const {
  const double bearing = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double jitter = rng.uniform(-0.5, 0.5);
  DubinPose att{config_.goal_x + config_.attacker_start_radius * std::cos(bearing),
                config_.goal_y + config_.attacker_start_radius * std::sin(bearing),
                bearing + std::numbers::pi};
  DubinPose def{config_.goal_x + config_.defender_start_radius * std::cos(bearing + jitter),
                config_.goal_y + config_.defender_start_radius * std::sin(bearing + jitter),
                bearing + jitter};
  return make_state(att, def);
}

std::vector<double> DubinTagGame::encode(const GameState& s) const {
  const double k = 1.0 / config_.arena_scale;
  return {(s.data[0] - config_.goal_x) * k, (s.data[1] - config_.goal_y) * k,
          std::cos(s.data[2]),             std::sin(s.data[2]),
          (s.data[3] - config_.goal_x) * k, (s.data[4] - config_.goal_y) * k,
          std::cos(s.data[5]),             std::sin(s.data[5])};
}

StepResult DubinTagGame::apply(const GameState& s, JointAction a) const {
  const DubinPose att = dubin_integrate(attacker(s), config_.v_att, turn_rate(a.a1), config_.dt);
  const DubinPose def = dubin_integrate(defender(s), config_.v_def, turn_rate(a.a2), config_.dt);
  StepResult r;
  r.next = make_state(att, def, s.step);
  const bool captured =
      std::hypot(att.x - def.x, att.y - def.y) <= config_.capture_radius;
  const bool scored =
      std::hypot(att.x - config_.goal_x, att.y - config_.goal_y) <= config_.goal_radius;
  if (captured) {
    r.terminal = true;
    r.reward1 = -1.0;
  } else if (scored) {
    r.terminal = true;
    r.reward1 = 1.0;
  }
  return r;
}

}  // namespace zerosum::envs
