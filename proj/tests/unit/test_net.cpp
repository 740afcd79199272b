#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>

#include "zerosum/error.hpp"
#include "zerosum/net.hpp"
#include "zerosum/rng.hpp"

using namespace zerosum;
using namespace zerosum::net;

namespace {

NetConfig small_config(std::uint64_t seed, double out_scale = 1.0) {
  NetConfig c;
  c.input_size = 4;
  c.actions1 = 3;
  c.actions2 = 2;
  c.trunk_widths = {6, 5};
  c.head_widths = {4};
  c.binning = ValueBinning::symmetric(1.0, 11);
  c.seed = seed;
  c.output_init_scale = out_scale;
  return c;
}

std::vector<double> random_dist(Rng& rng, int k) {
  std::vector<double> w(k);
  for (double& x : w) x = rng.uniform(0.05, 1.0);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  return w;
}

std::vector<TrainingSample> random_batch(Rng& rng, const NetConfig& c, int n) {
  std::vector<TrainingSample> batch;
  for (int i = 0; i < n; ++i) {
    TrainingSample s;
    s.x.resize(c.input_size);
    for (double& x : s.x) x = rng.uniform(-1.0, 1.0);
    s.pi1 = random_dist(rng, c.actions1);
    s.pi2 = random_dist(rng, c.actions2);
    s.v1 = rng.uniform(-1.2, 1.2);
    batch.push_back(s);
  }
  return batch;
}

double at(const NetworkParams& p, int array, int offset) {
  int i = 0;
  double out = 0.0;
  p.for_each_array([&](const ConstArrayRef& a) {
    if (i++ == array) out = a.data[offset];
  });
  return out;
}

void set_at(NetworkParams& p, int array, int offset, double v) {
  int i = 0;
  p.for_each_array([&](const ArrayRef& a) {
    if (i++ == array) a.data[offset] = v;
  });
}

std::vector<int> array_sizes(const NetworkParams& p) {
  std::vector<int> sizes;
  p.for_each_array([&](const ConstArrayRef& a) { sizes.push_back(a.rows * a.cols); });
  return sizes;
}

}  // namespace

TEST_SUITE("net") {
  TEST_CASE("forward outputs are distributions") {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
      const Network net(small_config(t));
      std::vector<double> x(4);
      for (double& v : x) v = rng.uniform(-5.0, 5.0);
      const NetworkOutput o = net.forward(x);
      CHECK(std::accumulate(o.p1.begin(), o.p1.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::accumulate(o.p2.begin(), o.p2.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::accumulate(o.value_dist.begin(), o.value_dist.end(), 0.0) ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(o.value >= -1.0);
      CHECK(o.value <= 1.0);
    }
  }

  TEST_CASE("forward stays finite for extreme inputs") {
    const Network net(small_config(3, 50.0));
    const NetworkOutput o = net.forward(std::vector<double>{1e6, -1e6, 3e5, 0.0});
    for (double p : o.p1) CHECK(std::isfinite(p));
    for (double p : o.value_dist) CHECK(std::isfinite(p));
    CHECK(std::isfinite(o.value));
  }

  TEST_CASE("zero output layers give uniform heads and the midpoint value") {
    const Network net(small_config(2, 0.0));
    const NetworkOutput o = net.forward(std::vector<double>{0.3, -0.2, 0.9, 0.1});
    for (double p : o.p1) CHECK(p == doctest::Approx(1.0 / 3.0));
    for (double p : o.p2) CHECK(p == doctest::Approx(0.5));
    CHECK(std::abs(o.value) < 1e-12);
  }

  TEST_CASE("input size is checked") {
    const Network net(small_config(0));
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), InvalidArgument);
  }

  TEST_CASE("forward batch matches single forward") {
    const Network net(small_config(4));
    Rng rng(2);
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> x(4);
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      xs.push_back(x);
    }
    const auto batch = net.forward_batch(xs);
    for (int i = 0; i < 5; ++i) {
      const auto single = net.forward(xs[i]);
      CHECK(batch[i].value == doctest::Approx(single.value).epsilon(1e-12));
      for (int a = 0; a < 3; ++a) CHECK(batch[i].p1[a] == doctest::Approx(single.p1[a]).epsilon(1e-12));
    }
  }

  TEST_CASE("hl gauss target against an independent normal-cdf evaluation") {
    const ValueBinning b = ValueBinning::symmetric(1.0, 51, 0.75);
    const MixedStrategy t = hl_gauss_target(0.1234, b);
    CHECK(t[27] == doctest::Approx(0.180210102479869).epsilon(1e-12));
    CHECK(t[28] == doctest::Approx(0.486933040388911).epsilon(1e-12));
    CHECK(t[29] == doctest::Approx(0.283212252472308).epsilon(1e-12));
  }

  TEST_CASE("hl gauss target sums to one") {
    const ValueBinning b = ValueBinning::symmetric(3.0, 51, 0.75);
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
      const MixedStrategy t = hl_gauss_target(rng.uniform(-4.0, 4.0), b);
      const double s = std::accumulate(t.probs().begin(), t.probs().end(), 0.0);
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("hl gauss with vanishing smoothing is one-hot") {
    ValueBinning b = ValueBinning::symmetric(1.0, 51, 0.75);
    b.sigma = b.width() / 100.0;
    const MixedStrategy t = hl_gauss_target(b.center(25), b);
    CHECK(t[25] > 0.999);
  }

  TEST_CASE("hl gauss midpoint target is symmetric") {
    const ValueBinning b = ValueBinning::symmetric(2.0, 51, 0.75);
    const MixedStrategy t = hl_gauss_target(0.0, b);
    double e = 0.0;
    for (int i = 0; i < 51; ++i) {
      CHECK(t[i] == doctest::Approx(t[50 - i]).epsilon(1e-12));
      e += t[i] * b.center(i);
    }
    CHECK(std::abs(e) < 1e-9);
  }

  TEST_CASE("hl gauss expectation tracks v away from the support edges") {
    const ValueBinning b = ValueBinning::symmetric(1.0, 51, 0.75);
    for (int i = 0; i <= 1000; ++i) {
      const double v = b.v_min + 3 * b.width() + (b.v_max - b.v_min - 6 * b.width()) * i / 1000.0;
      const MixedStrategy t = hl_gauss_target(v, b);
      double e = 0.0;
      for (int k = 0; k < b.bins; ++k) e += t[k] * b.center(k);
      CHECK(std::abs(e - v) <= 0.5 * b.width());
    }
  }

  TEST_CASE("hl gauss clamps out-of-range values") {
    const ValueBinning b = ValueBinning::symmetric(1.0, 21, 0.75);
    CHECK(hl_gauss_target(5.0, b) == hl_gauss_target(1.0, b));
    CHECK(hl_gauss_target(-5.0, b) == hl_gauss_target(-1.0, b));
  }

  TEST_CASE("binning validation") {
    ValueBinning b;
    b.v_min = 1.0;
    b.v_max = 1.0;
    CHECK_THROWS_AS(b.validate(), InvalidArgument);
    b = ValueBinning{};
    b.bins = 1;
    CHECK_THROWS_AS(b.validate(), InvalidArgument);
    b = ValueBinning{};
    b.sigma = 0.0;
    CHECK_THROWS_AS(hl_gauss_target(0.0, b), InvalidArgument);
  }

  TEST_CASE("uniform targets on uniform heads cost 2 ln k") {
    NetConfig c = small_config(0, 0.0);
    c.actions1 = 4;
    c.actions2 = 4;
    const Network net(c);
    TrainingSample s{{0.1, 0.2, 0.3, 0.4}, std::vector<double>(4, 0.25), std::vector<double>(4, 0.25), 0.0};
    const LossBreakdown l = loss(net, std::span(&s, 1), 0.0);
    CHECK(l.policy == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
  }

  TEST_CASE("matching outputs reach the entropy lower bound") {
    const Network net(small_config(7));
    const std::vector<double> x = {0.5, -0.5, 0.25, 1.0};
    const NetworkOutput o = net.forward(x);
    TrainingSample s{x, o.p1, o.p2, 0.3};
    const LossBreakdown l = loss(net, std::span(&s, 1), 0.0);
    double h = 0.0;
    for (double p : o.p1) h -= p * std::log(p);
    for (double p : o.p2) h -= p * std::log(p);
    CHECK(l.policy == doctest::Approx(h).epsilon(1e-12));
    // A mismatched target costs more than its own entropy.
    TrainingSample other = s;
    other.pi1 = {0.2, 0.3, 0.5};
    double h_other = 0.0;
    for (double p : other.pi1) h_other -= p * std::log(p);
    for (double p : other.pi2) h_other -= p * std::log(p);
    CHECK(loss(net, std::span(&other, 1), 0.0).policy > h_other);
  }

  TEST_CASE("duplicating the batch leaves the loss unchanged") {
    Rng rng(8);
    const NetConfig c = small_config(8);
    const Network net(c);
    auto batch = random_batch(rng, c, 5);
    const LossBreakdown a = loss(net, batch, 1e-3);
    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const LossBreakdown b = loss(net, doubled, 1e-3);
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
  }

  TEST_CASE("empty batch is rejected") {
    const Network net(small_config(0));
    std::vector<TrainingSample> none;
    CHECK_THROWS_AS(loss(net, none, 0.0), InvalidArgument);
    CHECK_THROWS_AS(loss_grads(net, none, 0.0), InvalidArgument);
  }

  TEST_CASE("regularization gradient is 2 lambda theta") {
    const Network net(small_config(9));
    Rng rng(9);
    const NetConfig c = small_config(9);
    const auto batch = random_batch(rng, c, 3);
    const LossAndGrads with = loss_grads(net, batch, 0.01);
    const LossAndGrads without = loss_grads(net, batch, 0.0);
    const auto sizes = array_sizes(net.params());
    for (int a = 0; a < static_cast<int>(sizes.size()); ++a) {
      for (int k = 0; k < sizes[a]; ++k) {
        const double reg = at(with.grads, a, k) - at(without.grads, a, k);
        CHECK(reg == doctest::Approx(0.02 * at(net.params(), a, k)).epsilon(1e-9));
      }
    }
    CHECK(with.loss.regularization == doctest::Approx(0.01 * net.params().squared_norm()));
  }

  TEST_CASE("analytic gradients match central differences") {
    Rng rng(10);
    const NetConfig c = small_config(10);
    Network net(c);
    const auto batch = random_batch(rng, c, 4);
    const LossAndGrads lg = loss_grads(net, batch, 1e-3);
    const auto sizes = array_sizes(net.params());
    for (int t = 0; t < 20; ++t) {
      const int a = rng.index(static_cast<int>(sizes.size()));
      const int k = rng.index(sizes[a]);
      const double theta = at(net.params(), a, k);
      const double h = 1e-5;
      set_at(net.mutable_params(), a, k, theta + h);
      const double up = loss(net, batch, 1e-3).total;
      set_at(net.mutable_params(), a, k, theta - h);
      const double down = loss(net, batch, 1e-3).total;
      set_at(net.mutable_params(), a, k, theta);
      const double fd = (up - down) / (2 * h);
      const double an = at(lg.grads, a, k);
      CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}) < 1e-4);
    }
  }

  TEST_CASE("sgd is a plain gradient step") {
    Network net(small_config(11));
    const NetworkParams before = net.params();
    Rng rng(11);
    const auto batch = random_batch(rng, small_config(11), 3);
    const GradientSet g = loss_grads(net, batch, 0.0).grads;
    Optimizer sgd(OptimizerKind::kSgd);
    sgd.step(net.mutable_params(), g, 0.1);
    const auto sizes = array_sizes(before);
    for (int a = 0; a < static_cast<int>(sizes.size()); ++a) {
      for (int k = 0; k < sizes[a]; ++k) {
        CHECK(at(net.params(), a, k) == at(before, a, k) - 0.1 * at(g, a, k));
      }
    }
  }

  TEST_CASE("adam leaves parameters fixed under zero gradients") {
    Network net(small_config(12));
    const NetworkParams before = net.params();
    Optimizer adam;
    const GradientSet zero = before.zeros_like();
    for (int i = 0; i < 3; ++i) adam.step(net.mutable_params(), zero, 1e-3);
    const auto sizes = array_sizes(before);
    for (int a = 0; a < static_cast<int>(sizes.size()); ++a) {
      for (int k = 0; k < sizes[a]; ++k) CHECK(at(net.params(), a, k) == at(before, a, k));
    }
  }

  TEST_CASE("optimizer steps are deterministic and shape checked") {
    Rng rng(13);
    const NetConfig c = small_config(13);
    const auto batch = random_batch(rng, c, 3);
    Network a(c), b(c);
    Optimizer oa, ob;
    for (int i = 0; i < 3; ++i) {
      oa.step(a.mutable_params(), loss_grads(a, batch, 0.0).grads, 1e-3);
      ob.step(b.mutable_params(), loss_grads(b, batch, 0.0).grads, 1e-3);
    }
    CHECK(serialize(a) == serialize(b));
    NetConfig other = c;
    other.trunk_widths = {3};
    const Network wrong(other);
    CHECK_THROWS_AS(oa.step(a.mutable_params(), wrong.params(), 1e-3), InvalidArgument);
  }

  TEST_CASE("training on a frozen dataset decreases the loss monotonically") {
    int monotone = 0;
    const int runs = 20;
    for (int seed = 0; seed < runs; ++seed) {
      Rng rng(derive_seed(14, "frozen", seed));
      const NetConfig c = small_config(seed);
      Network net(c);
      const auto batch = random_batch(rng, c, 16);
      Optimizer adam;
      double prev = loss(net, batch, 1e-4).total;
      bool ok = true;
      for (int step = 0; step < 100; ++step) {
        const LossAndGrads lg = loss_grads(net, batch, 1e-4);
        adam.step(net.mutable_params(), lg.grads, 1e-3);
        const double now = loss(net, batch, 1e-4).total;
        if (!(now < prev)) ok = false;
        prev = now;
      }
      monotone += ok ? 1 : 0;
    }
    CHECK(monotone >= 19);
  }

  TEST_CASE("checkpoint round trip is byte exact") {
    const Network net(small_config(15));
    const std::string bytes = serialize(net);
    CHECK(bytes.substr(0, 4) == "SAZ1");
    CHECK(static_cast<unsigned char>(bytes[4]) == kCheckpointVersion);
    const Network back = deserialize(bytes);
    CHECK(serialize(back) == bytes);
    CHECK(back.binning() == net.binning());
    const std::vector<double> x = {0.1, 0.2, -0.3, 0.4};
    CHECK(back.forward(x).value == net.forward(x).value);
  }

  TEST_CASE("checkpoint layout") {
    const Network net(small_config(16));
    const std::string bytes = serialize(net);
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 5, 4);
    // Binning entry plus weight and bias per layer: trunk 2, heads 2 + 2 + 2.
    CHECK(count == 1 + 2 * 8);
    CHECK(static_cast<unsigned char>(bytes[9]) == 0xF0);
    std::size_t floats = 3;
    net.params().for_each_array([&](const ConstArrayRef& a) { floats += a.rows * a.cols; });
    CHECK(bytes.size() == 9 + 9 * count + 8 * floats);
  }

  TEST_CASE("corrupt checkpoints are rejected") {
    const std::string good = serialize(Network(small_config(17)));
    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize(bad), FormatError);
    bad = good;
    bad[4] = 9;
    CHECK_THROWS_AS(deserialize(bad), FormatError);
    CHECK_THROWS_AS(deserialize(good.substr(0, good.size() - 8)), FormatError);
    CHECK_THROWS_AS(deserialize(good + "x"), FormatError);
    CHECK_THROWS_AS(deserialize(""), FormatError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/checkpoint.saz"), FormatError);
  }

  TEST_CASE("checkpoint files round trip") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "zerosum_net_test";
    std::filesystem::create_directories(dir);
    const Network net(small_config(18));
    save_checkpoint(net, dir / "a.saz");
    save_checkpoint(load_checkpoint(dir / "a.saz"), dir / "b.saz");
    CHECK(serialize(load_checkpoint(dir / "a.saz")) == serialize(load_checkpoint(dir / "b.saz")));
    std::filesystem::remove_all(dir);
  }
}
