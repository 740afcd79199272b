#include "zerosum/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zerosum/error.hpp"
#include "zerosum/rng.hpp"

namespace zerosum::net {

// ---------------------------------------------------------------------------
// Value binning

ValueBinning ValueBinning::symmetric(double scale, int bins, double sigma_ratio) {
  ValueBinning b;
  b.v_min = -scale;
  b.v_max = scale;
  b.bins = bins;
  b.sigma = sigma_ratio * (2.0 * scale / bins);
  b.validate();
  return b;
}

void ValueBinning::validate() const {
  if (!(v_min < v_max)) throw InvalidArgument("value binning: v_min must be < v_max");
  if (bins < 2) throw InvalidArgument("value binning: at least 2 bins required");
  if (!(sigma > 0.0)) throw InvalidArgument("value binning: sigma must be positive");
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

MixedStrategy hl_gauss_target(double v, const ValueBinning& binning) {
  binning.validate();
  const double clamped = std::clamp(v, binning.v_min, binning.v_max);
  std::vector<double> cdf(binning.bins + 1);
  for (int b = 0; b <= binning.bins; ++b) {
    const double edge = b == binning.bins ? binning.v_max : binning.edge(b);
    cdf[b] = normal_cdf((edge - clamped) / binning.sigma);
  }
  const double z = cdf.back() - cdf.front();
  std::vector<double> target(binning.bins);
  for (int b = 0; b < binning.bins; ++b) target[b] = (cdf[b + 1] - cdf[b]) / z;
  return MixedStrategy(std::move(target));
}

// ---------------------------------------------------------------------------
// Parameters

std::vector<DenseLayer>& NetworkParams::block(Block b) {
  switch (b) {
    case Block::kTrunk: return trunk;
    case Block::kPolicy1: return policy1;
    case Block::kPolicy2: return policy2;
    case Block::kValue: return value;
  }
  throw InvalidArgument("unknown block");
}

const std::vector<DenseLayer>& NetworkParams::block(Block b) const {
  return const_cast<NetworkParams*>(this)->block(b);
}

namespace {

constexpr Block kBlocks[] = {Block::kTrunk, Block::kPolicy1, Block::kPolicy2, Block::kValue};

}  // namespace

void NetworkParams::for_each_array(const std::function<void(const ArrayRef&)>& fn) {
  for (Block b : kBlocks) {
    auto& layers = block(b);
    for (int l = 0; l < static_cast<int>(layers.size()); ++l) {
      auto& w = layers[l].weight;
      auto& bias = layers[l].bias;
      fn(ArrayRef{b, l, false, w.data(), int(w.rows()), int(w.cols())});
      fn(ArrayRef{b, l, true, bias.data(), int(bias.size()), 1});
    }
  }
}

void NetworkParams::for_each_array(const std::function<void(const ConstArrayRef&)>& fn) const {
  for (Block b : kBlocks) {
    const auto& layers = block(b);
    for (int l = 0; l < static_cast<int>(layers.size()); ++l) {
      const auto& w = layers[l].weight;
      const auto& bias = layers[l].bias;
      fn(ConstArrayRef{b, l, false, w.data(), int(w.rows()), int(w.cols())});
      fn(ConstArrayRef{b, l, true, bias.data(), int(bias.size()), 1});
    }
  }
}

NetworkParams NetworkParams::zeros_like() const {
  NetworkParams z = *this;
  z.for_each_array([](const ArrayRef& a) { std::fill(a.data, a.data + a.rows * a.cols, 0.0); });
  return z;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
  for (Block b : kBlocks) {
    const auto& x = block(b);
    const auto& y = other.block(b);
    if (x.size() != y.size()) return false;
    for (std::size_t l = 0; l < x.size(); ++l) {
      if (x[l].weight.rows() != y[l].weight.rows() || x[l].weight.cols() != y[l].weight.cols() ||
          x[l].bias.size() != y[l].bias.size()) {
        return false;
      }
    }
  }
  return true;
}

double NetworkParams::squared_norm() const {
  double s = 0.0;
  for_each_array([&](const ConstArrayRef& a) {
    for (int i = 0; i < a.rows * a.cols; ++i) s += a.data[i] * a.data[i];
  });
  return s;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for_each_array([&](const ConstArrayRef& a) { n += static_cast<std::size_t>(a.rows) * a.cols; });
  return n;
}

bool NetworkParams::all_finite() const {
  bool ok = true;
  for_each_array([&](const ConstArrayRef& a) {
    for (int i = 0; i < a.rows * a.cols; ++i) ok = ok && std::isfinite(a.data[i]);
  });
  return ok;
}

void NetConfig::validate() const {
  if (input_size < 1) throw InvalidArgument("net: input_size must be >= 1");
  if (actions1 < 1 || actions2 < 1) throw InvalidArgument("net: action counts must be >= 1");
  if (trunk_widths.empty()) throw InvalidArgument("net: trunk needs at least one layer");
  for (int w : trunk_widths) {
    if (w < 1) throw InvalidArgument("net: trunk widths must be >= 1");
  }
  for (int w : head_widths) {
    if (w < 1) throw InvalidArgument("net: head widths must be >= 1");
  }
  if (!(output_init_scale >= 0.0)) throw InvalidArgument("net: output_init_scale must be >= 0");
  binning.validate();
}

// ---------------------------------------------------------------------------
// Network

namespace {

DenseLayer make_layer(int in, int out, double scale, Rng& rng) {
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
  const double stddev = scale * std::sqrt(2.0 / in);
  for (int c = 0; c < in; ++c) {
    for (int r = 0; r < out; ++r) layer.weight(r, c) = stddev * rng.normal();
  }
  return layer;
}

std::vector<DenseLayer> make_head(int in, const std::vector<int>& hidden, int out, double out_scale,
                                  Rng& rng) {
  std::vector<DenseLayer> layers;
  int width = in;
  for (int h : hidden) {
    layers.push_back(make_layer(width, h, 1.0, rng));
    width = h;
  }
  layers.push_back(make_layer(width, out, out_scale, rng));
  return layers;
}

}  // namespace

Network::Network(const NetConfig& config) : binning_(config.binning) {
  config.validate();
  Rng rng(derive_seed(config.seed, "net-init"));
  int width = config.input_size;
  for (int w : config.trunk_widths) {
    params_.trunk.push_back(make_layer(width, w, 1.0, rng));
    width = w;
  }
  params_.policy1 =
      make_head(width, config.head_widths, config.actions1, config.output_init_scale, rng);
  params_.policy2 =
      make_head(width, config.head_widths, config.actions2, config.output_init_scale, rng);
  params_.value =
      make_head(width, config.head_widths, config.binning.bins, config.output_init_scale, rng);
  check_shapes();
}

Network::Network(NetworkParams params, ValueBinning binning)
    : params_(std::move(params)), binning_(binning) {
  binning_.validate();
  check_shapes();
}

void Network::check_shapes() const {
  const auto fail = [](const std::string& what) { throw InvalidArgument("network shape: " + what); };
  if (params_.trunk.empty()) fail("empty trunk");
  auto check_chain = [&](const std::vector<DenseLayer>& layers, long in, const char* name) {
    if (layers.empty()) fail(std::string(name) + " has no layers");
    for (const auto& l : layers) {
      if (l.weight.cols() != in) fail(std::string(name) + " input width mismatch");
      if (l.bias.size() != l.weight.rows()) fail(std::string(name) + " bias size mismatch");
      in = l.weight.rows();
    }
    return in;
  };
  const long trunk_out = check_chain(params_.trunk, params_.trunk.front().weight.cols(), "trunk");
  check_chain(params_.policy1, trunk_out, "policy head 1");
  check_chain(params_.policy2, trunk_out, "policy head 2");
  const long bins = check_chain(params_.value, trunk_out, "value head");
  if (bins != binning_.bins) fail("value head width does not match bin count");
}

int Network::input_size() const { return static_cast<int>(params_.trunk.front().weight.cols()); }
int Network::actions1() const { return static_cast<int>(params_.policy1.back().weight.rows()); }
int Network::actions2() const { return static_cast<int>(params_.policy2.back().weight.rows()); }

namespace {

// Activations of one forward pass over a batch (columns are samples).
struct BlockCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd out;                  // post-activation (ReLU) or softmax
};

Eigen::MatrixXd affine(const DenseLayer& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = l.weight * x;
  z.colwise() += l.bias;
  return z;
}

void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    auto col = z.col(c);
    const double mx = col.maxCoeff();
    col = (col.array() - mx).exp().matrix();
    col /= col.sum();
  }
}

// Trunk: every layer ReLU.
BlockCache run_trunk(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x) {
  BlockCache c;
  Eigen::MatrixXd h = x;
  for (const auto& l : layers) {
    c.inputs.push_back(h);
    c.pre.push_back(affine(l, h));
    h = c.pre.back().cwiseMax(0.0);
  }
  c.out = std::move(h);
  return c;
}

// Head: ReLU hidden layers, softmax output.
BlockCache run_head(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x) {
  BlockCache c;
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    c.inputs.push_back(h);
    c.pre.push_back(affine(layers[i], h));
    if (i + 1 < layers.size()) {
      h = c.pre.back().cwiseMax(0.0);
    } else {
      h = c.pre.back();
      softmax_columns(h);
    }
  }
  c.out = std::move(h);
  return c;
}

struct ForwardCache {
  BlockCache trunk;
  BlockCache p1;
  BlockCache p2;
  BlockCache value;
};

ForwardCache run_all(const NetworkParams& p, const Eigen::MatrixXd& x) {
  ForwardCache f;
  f.trunk = run_trunk(p.trunk, x);
  f.p1 = run_head(p.policy1, f.trunk.out);
  f.p2 = run_head(p.policy2, f.trunk.out);
  f.value = run_head(p.value, f.trunk.out);
  return f;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows());
}

}  // namespace

NetworkOutput Network::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw InvalidArgument("Network::forward: expected input of size " +
                          std::to_string(input_size()) + ", got " + std::to_string(x.size()));
  }
  Eigen::MatrixXd in(input_size(), 1);
  for (int i = 0; i < input_size(); ++i) in(i, 0) = x[i];
  const ForwardCache f = run_all(params_, in);
  NetworkOutput out{column(f.p1.out, 0), column(f.p2.out, 0), column(f.value.out, 0), 0.0};
  for (int b = 0; b < binning_.bins; ++b) out.value += out.value_dist[b] * binning_.center(b);
  return out;
}

std::vector<NetworkOutput> Network::forward_batch(
    const std::vector<std::vector<double>>& xs) const {
  if (xs.empty()) return {};
  Eigen::MatrixXd in(input_size(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t c = 0; c < xs.size(); ++c) {
    if (static_cast<int>(xs[c].size()) != input_size()) {
      throw InvalidArgument("Network::forward_batch: input size mismatch");
    }
    for (int i = 0; i < input_size(); ++i) in(i, static_cast<Eigen::Index>(c)) = xs[c][i];
  }
  const ForwardCache f = run_all(params_, in);
  std::vector<NetworkOutput> outs;
  outs.reserve(xs.size());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    NetworkOutput o{column(f.p1.out, c), column(f.p2.out, c), column(f.value.out, c), 0.0};
    for (int b = 0; b < binning_.bins; ++b) o.value += o.value_dist[b] * binning_.center(b);
    outs.push_back(std::move(o));
  }
  return outs;
}

// ---------------------------------------------------------------------------
// Loss and gradients

namespace {

struct BatchTargets {
  Eigen::MatrixXd x;
  Eigen::MatrixXd pi1;
  Eigen::MatrixXd pi2;
  Eigen::MatrixXd value;
};

BatchTargets gather(const Network& net, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw InvalidArgument("loss: batch must be nonempty");
  const auto n = static_cast<Eigen::Index>(batch.size());
  BatchTargets t{Eigen::MatrixXd(net.input_size(), n), Eigen::MatrixXd(net.actions1(), n),
                 Eigen::MatrixXd(net.actions2(), n), Eigen::MatrixXd(net.binning().bins, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const TrainingSample& s = batch[k];
    if (static_cast<int>(s.x.size()) != net.input_size() ||
        static_cast<int>(s.pi1.size()) != net.actions1() ||
        static_cast<int>(s.pi2.size()) != net.actions2()) {
      throw InvalidArgument("loss: sample shape does not match the network");
    }
    t.x.col(k) = Eigen::Map<const Eigen::VectorXd>(s.x.data(), net.input_size());
    t.pi1.col(k) = Eigen::Map<const Eigen::VectorXd>(s.pi1.data(), net.actions1());
    t.pi2.col(k) = Eigen::Map<const Eigen::VectorXd>(s.pi2.data(), net.actions2());
    const MixedStrategy v = hl_gauss_target(s.v1, net.binning());
    t.value.col(k) = Eigen::Map<const Eigen::VectorXd>(v.probs().data(), net.binning().bins);
  }
  return t;
}

// Sum over the batch of -sum_i t_i log(max(p_i, floor)).
double cross_entropy(const Eigen::MatrixXd& p, const Eigen::MatrixXd& t) {
  return -(t.array() * p.array().max(kLogFloor).log()).sum();
}

// d/dlogits of scale * CE through the softmax, honoring the log floor.
Eigen::MatrixXd cross_entropy_logit_grad(const Eigen::MatrixXd& p, const Eigen::MatrixXd& t,
                                         double scale) {
  Eigen::MatrixXd gp = (p.array() >= kLogFloor).select(-t.array() / p.array(), 0.0).matrix();
  gp *= scale;
  Eigen::MatrixXd dz(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const double inner = p.col(c).dot(gp.col(c));
    dz.col(c) = p.col(c).cwiseProduct(gp.col(c) - Eigen::VectorXd::Constant(p.rows(), inner));
  }
  return dz;
}

// Backpropagates d(loss)/d(output pre-activation of last layer) through a
// head or trunk. Returns d(loss)/d(block input).
Eigen::MatrixXd backprop_block(const std::vector<DenseLayer>& layers, const BlockCache& cache,
                               Eigen::MatrixXd delta, bool last_is_linear,
                               std::vector<DenseLayer>& grads) {
  for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
    const bool relu = !(last_is_linear && i == static_cast<int>(layers.size()) - 1);
    if (relu) delta = delta.cwiseProduct((cache.pre[i].array() > 0.0).cast<double>().matrix());
    grads[i].weight += delta * cache.inputs[i].transpose();
    grads[i].bias += delta.rowwise().sum();
    delta = layers[i].weight.transpose() * delta;
  }
  return delta;
}

LossBreakdown evaluate_loss(const ForwardCache& f, const BatchTargets& t, double reg, double n) {
  LossBreakdown out;
  out.policy = (cross_entropy(f.p1.out, t.pi1) + cross_entropy(f.p2.out, t.pi2)) / n;
  out.value = cross_entropy(f.value.out, t.value) / n;
  out.regularization = reg;
  out.total = out.policy + out.value + out.regularization;
  return out;
}

}  // namespace

LossBreakdown loss(const Network& net, std::span<const TrainingSample> batch, double l2) {
  const BatchTargets t = gather(net, batch);
  const ForwardCache f = run_all(net.params(), t.x);
  return evaluate_loss(f, t, l2 * net.params().squared_norm(), static_cast<double>(batch.size()));
}

LossAndGrads loss_grads(const Network& net, std::span<const TrainingSample> batch, double l2) {
  const BatchTargets t = gather(net, batch);
  const NetworkParams& p = net.params();
  const ForwardCache f = run_all(p, t.x);
  const double n = static_cast<double>(batch.size());

  LossAndGrads out{evaluate_loss(f, t, l2 * p.squared_norm(), n), p.zeros_like()};
  GradientSet& g = out.grads;

  Eigen::MatrixXd d_trunk =
      backprop_block(p.policy1, f.p1, cross_entropy_logit_grad(f.p1.out, t.pi1, 1.0 / n), true,
                     g.policy1);
  d_trunk += backprop_block(p.policy2, f.p2, cross_entropy_logit_grad(f.p2.out, t.pi2, 1.0 / n),
                            true, g.policy2);
  d_trunk += backprop_block(p.value, f.value,
                            cross_entropy_logit_grad(f.value.out, t.value, 1.0 / n), true, g.value);
  // The trunk output is post-ReLU, so the gradient enters before that ReLU.
  backprop_block(p.trunk, f.trunk, std::move(d_trunk), false, g.trunk);

  if (l2 != 0.0) {
    std::vector<const double*> sources;
    p.for_each_array([&](const ConstArrayRef& a) { sources.push_back(a.data); });
    std::size_t idx = 0;
    g.for_each_array([&](const ArrayRef& a) {
      const double* src = sources[idx++];
      for (int i = 0; i < a.rows * a.cols; ++i) a.data[i] += 2.0 * l2 * src[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer

Optimizer::Optimizer(OptimizerKind kind, double beta1, double beta2, double epsilon)
    : kind_(kind), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Optimizer::step(NetworkParams& params, const GradientSet& grads, double learning_rate) {
  if (!params.same_shape(grads)) throw InvalidArgument("Optimizer::step: shape mismatch");
  std::vector<const double*> g;
  grads.for_each_array([&](const ConstArrayRef& a) { g.push_back(a.data); });

  if (kind_ == OptimizerKind::kSgd) {
    std::size_t idx = 0;
    params.for_each_array([&](const ArrayRef& a) {
      const double* gi = g[idx++];
      for (int i = 0; i < a.rows * a.cols; ++i) a.data[i] -= learning_rate * gi[i];
    });
    ++t_;
    return;
  }

  if (t_ == 0 || !m_.same_shape(params)) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  ++t_;
  std::vector<double*> m;
  std::vector<double*> v;
  m_.for_each_array([&](const ArrayRef& a) { m.push_back(a.data); });
  v_.for_each_array([&](const ArrayRef& a) { v.push_back(a.data); });
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  params.for_each_array([&](const ArrayRef& a) {
    const double* gi = g[idx];
    double* mi = m[idx];
    double* vi = v[idx];
    ++idx;
    for (int i = 0; i < a.rows * a.cols; ++i) {
      mi[i] = beta1_ * mi[i] + (1.0 - beta1_) * gi[i];
      vi[i] = beta2_ * vi[i] + (1.0 - beta2_) * gi[i] * gi[i];
      const double mhat = mi[i] / c1;
      const double vhat = vi[i] / c2;
      a.data[i] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon_);
    }
  });
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[4] = {'S', 'A', 'Z', '1'};
constexpr std::uint8_t kBinningRole = 0xF0;

std::uint8_t role_tag(Block b, int layer, bool is_bias) {
  return static_cast<std::uint8_t>((static_cast<int>(b) << 4) | (layer << 1) | (is_bias ? 1 : 0));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: unexpected end of data");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

struct ManifestEntry {
  std::uint8_t role;
  std::uint32_t rows;
  std::uint32_t cols;
};

}  // namespace

std::string serialize(const Network& net) {
  std::vector<ManifestEntry> manifest;
  manifest.push_back({kBinningRole, 1, 3});
  net.params().for_each_array([&](const ConstArrayRef& a) {
    manifest.push_back({role_tag(a.block, a.layer, a.is_bias), std::uint32_t(a.rows),
                        std::uint32_t(a.cols)});
  });

  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kCheckpointVersion));
  put_u32(out, static_cast<std::uint32_t>(manifest.size()));
  for (const auto& e : manifest) {
    out.push_back(static_cast<char>(e.role));
    put_u32(out, e.rows);
    put_u32(out, e.cols);
  }
  put_f64(out, net.binning().v_min);
  put_f64(out, net.binning().v_max);
  put_f64(out, net.binning().sigma);
  net.params().for_each_array([&](const ConstArrayRef& a) {
    // Eigen storage is column-major; the file is row-major.
    for (int r = 0; r < a.rows; ++r) {
      for (int c = 0; c < a.cols; ++c) put_f64(out, a.data[c * a.rows + r]);
    }
  });
  return out;
}

Network deserialize(std::string_view bytes) {
  Reader in(bytes);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(in.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint: bad magic bytes");
  const std::uint8_t version = in.u8();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  if (count < 1 || count > 4096) throw FormatError("checkpoint: implausible manifest size");
  std::vector<ManifestEntry> manifest(count);
  for (auto& e : manifest) {
    e.role = in.u8();
    e.rows = in.u32();
    e.cols = in.u32();
    if (e.rows == 0 || e.cols == 0 || e.rows > (1u << 20) || e.cols > (1u << 20)) {
      throw FormatError("checkpoint: bad array shape in manifest");
    }
  }
  if (manifest[0].role != kBinningRole || manifest[0].rows != 1 || manifest[0].cols != 3) {
    throw FormatError("checkpoint: missing value binning entry");
  }
  ValueBinning binning;
  binning.v_min = in.f64();
  binning.v_max = in.f64();
  binning.sigma = in.f64();

  NetworkParams params;
  std::size_t i = 1;
  for (Block b : kBlocks) {
    auto& layers = params.block(b);
    int layer = 0;
    while (i < manifest.size() && (manifest[i].role >> 4) == static_cast<int>(b)) {
      if (i + 1 >= manifest.size()) throw FormatError("checkpoint: weight without bias");
      const ManifestEntry& w = manifest[i];
      const ManifestEntry& bias = manifest[i + 1];
      if (w.role != role_tag(b, layer, false) || bias.role != role_tag(b, layer, true)) {
        throw FormatError("checkpoint: manifest roles out of order");
      }
      if (bias.rows != w.rows || bias.cols != 1) {
        throw FormatError("checkpoint: bias shape does not match weight");
      }
      layers.push_back(DenseLayer{Eigen::MatrixXd(w.rows, w.cols), Eigen::VectorXd(bias.rows)});
      i += 2;
      ++layer;
    }
  }
  if (i != manifest.size()) throw FormatError("checkpoint: unknown manifest role");

  params.for_each_array([&](const ArrayRef& a) {
    for (int r = 0; r < a.rows; ++r) {
      for (int c = 0; c < a.cols; ++c) a.data[c * a.rows + r] = in.f64();
    }
  });
  if (!in.done()) throw FormatError("checkpoint: trailing bytes");
  binning.bins = params.value.empty() ? 0 : static_cast<int>(params.value.back().weight.rows());
  try {
    return Network(std::move(params), binning);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const std::string bytes = serialize(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace zerosum::net
