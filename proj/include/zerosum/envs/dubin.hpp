#pragma once

#include "zerosum/game.hpp"

namespace zerosum::envs {

struct DubinConfig {
  double v_att = 1.0;
  double v_def = 1.1;
  double u_max = 1.0;
  double dt = 0.3;
  double goal_x = 0.0;
  double goal_y = 0.0;
  double goal_radius = 1.0;
  double capture_radius = 0.5;
  int horizon = 20;
  // Positions are divided by this in the network encoding.
  double arena_scale = 10.0;
  // Initial-state sampler: attacker starts on a ring of this radius around
  // the goal, defender between attacker and goal at defender_start_radius.
  double attacker_start_radius = 6.0;
  double defender_start_radius = 2.5;

  void validate() const;
};

// Agent pose; heading wrapped to [-pi, pi).
struct DubinPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

// Exact constant-turn-rate solution of x' = V cos(th), y' = V sin(th), th' = u
// over dt.
DubinPose dubin_integrate(const DubinPose& pose, double speed, double turn_rate, double dt);

double wrap_angle(double theta);

// Dubin Tag: player 1 is the attacker (reach the goal disk, +1), player 2 the
// defender (come within capture radius, -1). Capture wins simultaneous ties.
// State data: [xa, ya, tha, xd, yd, thd]. Actions: turn rate in
// {-u_max, 0, +u_max}.
class DubinTagGame final : public MarkovGame {
 public:
  explicit DubinTagGame(DubinConfig config, double discount = 1.0);

  std::string name() const override { return "dubin"; }
  int num_actions(const GameState&, Player) const override { return 3; }
  int max_actions(Player) const override { return 3; }
  GameState initial_state(Rng& rng) const override;
  using MarkovGame::initial_state;
  std::vector<double> encode(const GameState& s) const override;
  int encoding_size() const override { return 8; }
  double max_abs_reward() const override { return 1.0; }

  const DubinConfig& config() const { return config_; }

  static GameState make_state(const DubinPose& attacker, const DubinPose& defender, int step = 0);
  static DubinPose attacker(const GameState& s);
  static DubinPose defender(const GameState& s);
  double turn_rate(int action) const;

 protected:
  StepResult apply(const GameState& s, JointAction a) const override;

 private:
  DubinConfig config_;
};

}  // namespace zerosum::envs
