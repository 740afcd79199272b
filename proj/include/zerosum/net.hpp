#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zerosum/matgame.hpp"

namespace zerosum::net {

// Discretization of the scalar value into equal-width bins on
// [v_min, v_max], with Gaussian smoothing width sigma for targets.
struct ValueBinning {
  double v_min = -1.0;
  double v_max = 1.0;
  int bins = 51;
  double sigma = 0.75 * 2.0 / 51;

  // bins spanning [-scale, scale], sigma = sigma_ratio * bin width.
  static ValueBinning symmetric(double scale, int bins, double sigma_ratio = 0.75);

  void validate() const;
  double width() const { return (v_max - v_min) / bins; }
  double edge(int b) const { return v_min + b * width(); }
  double center(int b) const { return v_min + (b + 0.5) * width(); }

  friend bool operator==(const ValueBinning&, const ValueBinning&) = default;
};

// Gaussian-histogram target: the normal(v, sigma) mass of each bin,
// renormalized to the support. v is clamped to [v_min, v_max] first.
MixedStrategy hl_gauss_target(double v, const ValueBinning& binning);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

enum class Block : std::uint8_t { kTrunk = 0, kPolicy1 = 1, kPolicy2 = 2, kValue = 3 };

struct ArrayRef {
  Block block;
  int layer;
  bool is_bias;
  double* data;
  int rows;
  int cols;
};

struct ConstArrayRef {
  Block block;
  int layer;
  bool is_bias;
  const double* data;
  int rows;
  int cols;
};

// Shared trunk (ReLU layers) feeding two policy heads and a value head. Each
// head is zero or more ReLU hidden layers followed by a linear output layer
// whose logits go through a normalized exponential.
struct NetworkParams {
  std::vector<DenseLayer> trunk;
  std::vector<DenseLayer> policy1;
  std::vector<DenseLayer> policy2;
  std::vector<DenseLayer> value;

  std::vector<DenseLayer>& block(Block b);
  const std::vector<DenseLayer>& block(Block b) const;

  // Visits every parameter array in manifest order. Data is column-major
  // (Eigen storage); biases are rows x 1.
  void for_each_array(const std::function<void(const ArrayRef&)>& fn);
  void for_each_array(const std::function<void(const ConstArrayRef&)>& fn) const;

  NetworkParams zeros_like() const;
  bool same_shape(const NetworkParams& other) const;
  double squared_norm() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Gradients share NetworkParams' layout exactly.
using GradientSet = NetworkParams;

struct NetConfig {
  int input_size = 0;
  int actions1 = 0;
  int actions2 = 0;
  std::vector<int> trunk_widths = {64, 64};
  std::vector<int> head_widths = {64};
  ValueBinning binning;
  std::uint64_t seed = 0;
  // Output layers start as N(0, scale^2 * 2/fan_in); 0 gives uniform heads.
  double output_init_scale = 0.0;

  void validate() const;
};

struct NetworkOutput {
  std::vector<double> p1;
  std::vector<double> p2;
  std::vector<double> value_dist;
  double value = 0.0;
};

class Network {
 public:
  explicit Network(const NetConfig& config);
  Network(NetworkParams params, ValueBinning binning);

  NetworkOutput forward(std::span<const double> x) const;
  std::vector<NetworkOutput> forward_batch(const std::vector<std::vector<double>>& xs) const;

  const NetworkParams& params() const { return params_; }
  NetworkParams& mutable_params() { return params_; }
  const ValueBinning& binning() const { return binning_; }

  int input_size() const;
  int actions1() const;
  int actions2() const;

 private:
  void check_shapes() const;

  NetworkParams params_;
  ValueBinning binning_;
};

struct TrainingSample {
  std::vector<double> x;
  std::vector<double> pi1;
  std::vector<double> pi2;
  double v1 = 0.0;
};

struct LossBreakdown {
  double policy = 0.0;
  double value = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

// Cross-entropy log arguments are floored at this value.
inline constexpr double kLogFloor = 1e-12;

// mean CE(value_dist, hl_gauss(v)) + mean [CE(p1, pi1) + CE(p2, pi2)]
//   + l2 * sum(theta^2). Throws InvalidArgument on an empty batch.
LossBreakdown loss(const Network& net, std::span<const TrainingSample> batch, double l2);

struct LossAndGrads {
  LossBreakdown loss;
  GradientSet grads;
};

LossAndGrads loss_grads(const Network& net, std::span<const TrainingSample> batch, double l2);

enum class OptimizerKind { kAdam, kSgd };

class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind = OptimizerKind::kAdam, double beta1 = 0.9,
                     double beta2 = 0.999, double epsilon = 1e-8);

  // In-place update. Throws InvalidArgument if the shapes differ.
  void step(NetworkParams& params, const GradientSet& grads, double learning_rate);

  OptimizerKind kind() const { return kind_; }
  long steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long t_ = 0;
  NetworkParams m_;
  NetworkParams v_;
};

// Checkpoint format: "SAZ1", version byte, u32 entry count, per entry
// (u8 role, u32 rows, u32 cols), then each array as row-major little-endian
// float64 in manifest order. The first entry (role 0xF0, 1x3) carries
// v_min, v_max, sigma of the value binning.
inline constexpr std::uint8_t kCheckpointVersion = 1;

std::string serialize(const Network& net);
// Throws FormatError on bad magic, version, or manifest.
Network deserialize(std::string_view bytes);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace zerosum::net
