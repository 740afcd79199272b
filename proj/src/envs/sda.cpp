#include "zerosum/envs/sda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zerosum/error.hpp"

namespace zerosum::envs {

namespace {

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Vec2 unit(Vec2 a) {
  const double n = norm(a);
  return n > 0.0 ? (1.0 / n) * a : Vec2{};
}

Vec2 gravity(Vec2 r, double mu) {
  const double d = norm(r);
  return (-mu / (d * d * d)) * r;
}

}  // namespace

void SdaConfig::validate() const {
  if (!(delta_v >= 0.0)) throw InvalidArgument("sda: delta_v must be >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("sda: dt must be positive");
  if (rk4_substeps < 1) throw InvalidArgument("sda: rk4_substeps must be >= 1");
  if (!(earth_radius > 0.0) || !(mu > 0.0)) throw InvalidArgument("sda: bad planet constants");
  if (!(sun_period >= 0.0)) throw InvalidArgument("sda: sun_period must be >= 0");
  if (horizon < 1) throw InvalidArgument("sda: horizon must be >= 1");
  if (!(observer_radius > earth_radius) || !(target_radius > earth_radius)) {
    throw InvalidArgument("sda: initial orbits must lie above the Earth radius");
  }
}

bool sda_eclipse(Vec2 target, Vec2 sun_dir, double earth_radius) {
  const double along = dot(target, sun_dir);
  if (along >= 0.0) return false;
  return std::abs(cross(sun_dir, target)) < earth_radius;
}

bool sda_los_occluded(Vec2 observer, Vec2 target, double earth_radius) {
  const Vec2 d = target - observer;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return false;
  const double t = -dot(observer, d) / len2;
  if (!(t > 0.0 && t < 1.0)) return false;
  const Vec2 closest = observer + t * d;
  return norm(closest) < earth_radius;
}

bool sda_sun_blinded(Vec2 observer, Vec2 target, Vec2 sun_dir, double half_angle) {
  const Vec2 los = unit(target - observer);
  const double c = std::clamp(dot(los, unit(sun_dir)), -1.0, 1.0);
  return std::acos(c) < half_angle;
}

Satellite propagate_two_body(const Satellite& sat, double mu, double dt, int substeps) {
  Vec2 r = sat.position;
  Vec2 v = sat.velocity;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Vec2 k1r = v;
    const Vec2 k1v = gravity(r, mu);
    const Vec2 k2r = v + (0.5 * h) * k1v;
    const Vec2 k2v = gravity(r + (0.5 * h) * k1r, mu);
    const Vec2 k3r = v + (0.5 * h) * k2v;
    const Vec2 k3v = gravity(r + (0.5 * h) * k2r, mu);
    const Vec2 k4r = v + h * k3v;
    const Vec2 k4v = gravity(r + h * k3r, mu);
    r = r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return Satellite{r, v};
}

double specific_energy(const Satellite& sat, double mu) {
  return 0.5 * dot(sat.velocity, sat.velocity) - mu / norm(sat.position);
}

SdaCustodyGame::SdaCustodyGame(SdaConfig config, double discount)
    : MarkovGame(config.horizon, discount), config_(config) {
  config_.validate();
}

GameState SdaCustodyGame::make_state(const Satellite& o, const Satellite& t, Vec2 sun, int step) {
  return GameState{{o.position.x, o.position.y, o.velocity.x, o.velocity.y, t.position.x,
                    t.position.y, t.velocity.x, t.velocity.y, sun.x, sun.y},
                   step, false};
}

Satellite SdaCustodyGame::observer(const GameState& s) {
  return Satellite{{s.data[0], s.data[1]}, {s.data[2], s.data[3]}};
}

Satellite SdaCustodyGame::target(const GameState& s) {
  return Satellite{{s.data[4], s.data[5]}, {s.data[6], s.data[7]}};
}

Vec2 SdaCustodyGame::sun_direction(const GameState& s) { return {s.data[8], s.data[9]}; }

bool SdaCustodyGame::eclipse(const GameState& s) const {
  return sda_eclipse(target(s).position, sun_direction(s), config_.earth_radius);
}

bool SdaCustodyGame::los_occluded(const GameState& s) const {
  return sda_los_occluded(observer(s).position, target(s).position, config_.earth_radius);
}

bool SdaCustodyGame::sun_blinded(const GameState& s) const {
  return sda_sun_blinded(observer(s).position, target(s).position, sun_direction(s),
                         config_.sun_exclusion_half_angle);
}

bool SdaCustodyGame::custody(const GameState& s) const {
  return !los_occluded(s) && !eclipse(s) && !sun_blinded(s);
}

GameState SdaCustodyGame::initial_state(Rng& rng) const {
  const auto circular = [&](double radius, double phase) {
    const double speed = std::sqrt(config_.mu / radius);
    return Satellite{{radius * std::cos(phase), radius * std::sin(phase)},
                     {-speed * std::sin(phase), speed * std::cos(phase)}};
  };
  const double phase = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double lead =
      config_.target_lead_angle + rng.uniform(-config_.lead_angle_jitter, config_.lead_angle_jitter);
  const Vec2 sun{std::cos(config_.sun_angle), std::sin(config_.sun_angle)};
  return make_state(circular(config_.observer_radius, phase),
                    circular(config_.target_radius, phase + lead), sun);
}

std::vector<double> SdaCustodyGame::encode(const GameState& s) const {
  const double r0 = config_.observer_radius;
  const double v0 = std::sqrt(config_.mu / r0);
  std::vector<double> x(10);
  for (int i = 0; i < 2; ++i) {
    const int base = 4 * i;
    x[base + 0] = s.data[base + 0] / r0;
    x[base + 1] = s.data[base + 1] / r0;
    x[base + 2] = s.data[base + 2] / v0;
    x[base + 3] = s.data[base + 3] / v0;
  }
  x[8] = s.data[8];
  x[9] = s.data[9];
  return x;
}

Satellite SdaCustodyGame::maneuver(const Satellite& sat, int action) const {
  const Vec2 along = unit(sat.velocity);
  const Vec2 radial = unit(sat.position);
  Vec2 dv{};
  switch (action) {
    case 1: dv = config_.delta_v * along; break;
    case 2: dv = -config_.delta_v * along; break;
    case 3: dv = config_.delta_v * radial; break;
    case 4: dv = -config_.delta_v * radial; break;
    default: break;
  }
  return Satellite{sat.position, sat.velocity + dv};
}

StepResult SdaCustodyGame::apply(const GameState& s, JointAction a) const {
  const Satellite obs = propagate_two_body(maneuver(observer(s), a.a1), config_.mu, config_.dt,
                                           config_.rk4_substeps);
  const Satellite tgt = propagate_two_body(maneuver(target(s), a.a2), config_.mu, config_.dt,
                                           config_.rk4_substeps);
  Vec2 sun = sun_direction(s);
  if (config_.sun_period > 0.0) {
    const double turn = 2.0 * std::numbers::pi * config_.dt / config_.sun_period;
    sun = unit(Vec2{sun.x * std::cos(turn) - sun.y * std::sin(turn),
                    sun.x * std::sin(turn) + sun.y * std::cos(turn)});
  }
  StepResult r;
  r.next = make_state(obs, tgt, sun, s.step);
  const bool observer_down = norm(obs.position) < config_.earth_radius;
  const bool target_down = norm(tgt.position) < config_.earth_radius;
  if (observer_down || target_down) {
    // An observer crash dominates when both go down in the same step.
    r.terminal = true;
    r.reward1 = observer_down ? -1.0 : 1.0;
    return r;
  }
  r.reward1 = custody(r.next) ? 1.0 : 0.0;
  return r;
}

}  // namespace zerosum::envs
