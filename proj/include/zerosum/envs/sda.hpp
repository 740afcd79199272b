#pragma once

#include "zerosum/game.hpp"

namespace zerosum::envs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct SdaConfig {
  double delta_v = 0.01;                   // km/s per impulsive maneuver
  double dt = 60.0;                        // s per step
  int rk4_substeps = 1;
  double earth_radius = 6378.137;          // km
  double mu = 398600.4418;                 // km^3/s^2
  double sun_exclusion_half_angle = 0.5235987755982988;  // rad (30 deg)
  // Sun direction rotation period in seconds; 0 keeps it fixed.
  double sun_period = 0.0;
  double sun_angle = 0.0;                  // initial sun direction (rad)
  int horizon = 24;
  // Initial-state sampler: circular orbits, target ahead of the observer.
  double observer_radius = 7000.0;
  double target_radius = 7050.0;
  double target_lead_angle = 0.1;          // rad
  double lead_angle_jitter = 0.05;         // rad

  void validate() const;
};

struct Satellite {
  Vec2 position;  // km, Earth-centered
  Vec2 velocity;  // km/s
};

// Target in the cylindrical Earth shadow.
bool sda_eclipse(Vec2 target, Vec2 sun_dir, double earth_radius);
// Segment observer->target passes within earth_radius of the origin, with the
// closest point strictly between the endpoints.
bool sda_los_occluded(Vec2 observer, Vec2 target, double earth_radius);
// Observer->target direction within the sun-exclusion cone around sun_dir.
bool sda_sun_blinded(Vec2 observer, Vec2 target, Vec2 sun_dir, double half_angle);

// Fixed-step RK4 propagation of planar two-body motion.
Satellite propagate_two_body(const Satellite& sat, double mu, double dt, int substeps);

double specific_energy(const Satellite& sat, double mu);

// Planar custody game: player 1 (observer) earns +1 per step in which it has
// an unoccluded, illuminated, non-sun-blinded line of sight to player 2
// (target). Actions per player: coast, prograde, retrograde, radial-out,
// radial-in. Falling below the Earth radius ends the episode.
// State data: [ox, oy, ovx, ovy, tx, ty, tvx, tvy, sun_x, sun_y].
class SdaCustodyGame final : public MarkovGame {
 public:
  explicit SdaCustodyGame(SdaConfig config, double discount = 1.0);

  std::string name() const override { return "sda"; }
  int num_actions(const GameState&, Player) const override { return 5; }
  int max_actions(Player) const override { return 5; }
  GameState initial_state(Rng& rng) const override;
  using MarkovGame::initial_state;
  std::vector<double> encode(const GameState& s) const override;
  int encoding_size() const override { return 10; }
  double max_abs_reward() const override { return 1.0; }

  const SdaConfig& config() const { return config_; }

  static GameState make_state(const Satellite& observer, const Satellite& target, Vec2 sun_dir,
                              int step = 0);
  static Satellite observer(const GameState& s);
  static Satellite target(const GameState& s);
  static Vec2 sun_direction(const GameState& s);

  bool eclipse(const GameState& s) const;
  bool los_occluded(const GameState& s) const;
  bool sun_blinded(const GameState& s) const;
  bool custody(const GameState& s) const;

  Satellite maneuver(const Satellite& sat, int action) const;

 protected:
  StepResult apply(const GameState& s, JointAction a) const override;

 private:
  SdaConfig config_;
};

}  // namespace zerosum::envs
