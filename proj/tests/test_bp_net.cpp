#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "cafbp/bp_net.hpp"
#include "cafbp/random.hpp"

using namespace cafbp;

namespace {

Network random_net(Rng& rng) {
  const NetworkShape s{1 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(5)),
                       1 + static_cast<int>(rng.below(5))};
  return Network::random(s, 0.5, rng.bits());
}

std::vector<double> random_vec(Rng& rng, int n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

double half_sse(const Network& net, const std::vector<double>& x, const std::vector<double>& d) {
  const auto t = forward(net, x);
  double e = 0;
  for (std::size_t k = 0; k < d.size(); ++k) e += 0.5 * (d[k] - t.output[k]) * (d[k] - t.output[k]);
  return e;
}

std::vector<TrainingPair> xor_pairs() {
  return {{{0, 0}, {0}}, {{0, 1}, {1}}, {{1, 0}, {1}}, {{1, 1}, {0}}};
}

}  // namespace

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(1.0), 0.7310585786, 1e-6);
  for (double x : {0.3, 2.0, 7.5}) EXPECT_NEAR(sigmoid(-x), 1.0 - sigmoid(x), 1e-15);
}

TEST(Forward, ZeroNetwork) {
  const auto net = Network::zeros({3, 4, 2});
  const auto t = forward(net, std::vector<double>{0.1, 0.9, 0.4});
  for (double h : t.hidden_out) EXPECT_EQ(h, 0.5);
  for (double o : t.output) EXPECT_EQ(o, 0.5);
}

TEST(Forward, HandChain) {
  auto net = Network::zeros({1, 1, 1});
  net.w_hidden(0, 0) = 1.0;
  net.w_output(0, 0) = 1.0;
  const auto t = forward(net, std::vector<double>{0.0});
  EXPECT_EQ(t.hidden_out[0], 0.5);
  EXPECT_EQ(t.net_output[0], 0.5);
  EXPECT_NEAR(t.output[0], 0.6224593312, 1e-6);
  EXPECT_THROW(forward(net, std::vector<double>{0.0, 1.0}), Error);
}

TEST(Backward, Examples) {
  const auto net = Network::zeros({2, 3, 1});
  const std::vector<double> x{0.2, 0.7};
  const auto t = forward(net, x);
  const auto matched = backward(net, t, t.output);
  EXPECT_EQ(matched.delta_output[0], 0.0);
  for (double v : matched.wed_hidden.data) EXPECT_EQ(v, 0.0);
  for (double v : matched.wed_output.data) EXPECT_EQ(v, 0.0);

  const auto g = backward(net, t, std::vector<double>{1.0});
  EXPECT_EQ(g.delta_output[0], 0.125);
  EXPECT_EQ(g.wed_bias_output[0], 0.125);
  EXPECT_EQ(g.wed_output(0, 1), 0.125 * 0.5);
  // Zero output weights block the error from reaching the hidden layer.
  for (double d : g.delta_hidden) EXPECT_EQ(d, 0.0);

  ForwardTrace hand = t;
  hand.hidden_out = {0.8, 0.8, 0.8};
  EXPECT_DOUBLE_EQ(backward(net, hand, std::vector<double>{1.0}).wed_output(0, 0), 0.1);
}

TEST(ApplyUpdate, Examples) {
  auto net = Network::zeros({1, 1, 1}, 0.5);
  net.w_output(0, 0) = 0.2;
  Gradients g{{0}, {0}, Matrix(1, 1, 0.1), Matrix(1, 1, 0.0), {0}, {0}};
  apply_update(net, g);
  EXPECT_DOUBLE_EQ(net.w_output(0, 0), 0.25);

  Rng rng(1);
  const auto before = Network::random({3, 2, 2}, 0.5, 9);
  auto after = before;
  Gradients zero{{0, 0}, {0, 0}, Matrix(2, 2), Matrix(2, 3), {0, 0}, {0, 0}};
  apply_update(after, zero);
  EXPECT_EQ(after, before);

  auto frozen = Network::random({3, 2, 2}, 0.0, 9);
  const auto copy = frozen;
  const std::vector<double> x{0.1, 0.2, 0.3};
  apply_update(frozen, backward(frozen, forward(frozen, x), std::vector<double>{1, 0}));
  EXPECT_EQ(frozen, copy);
}

TEST(Backward, MatchesFiniteDifferences) {
  Rng rng(7);
  const double h = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    auto net = random_net(rng);
    const auto x = random_vec(rng, net.shape.inputs);
    const auto d = random_vec(rng, net.shape.outputs);
    const auto g = backward(net, forward(net, x), d);
    auto check = [&](double& w, double wed) {
      const double saved = w;
      w = saved + h;
      const double ep = half_sse(net, x, d);
      w = saved - h;
      const double em = half_sse(net, x, d);
      w = saved;
      const double numeric = -(ep - em) / (2 * h);
      EXPECT_LE(std::abs(numeric - wed), 1e-4 * std::max(std::abs(numeric), 1e-6));
    };
    for (std::size_t i = 0; i < net.w_hidden.data.size(); ++i) check(net.w_hidden.data[i], g.wed_hidden.data[i]);
    for (std::size_t i = 0; i < net.w_output.data.size(); ++i) check(net.w_output.data[i], g.wed_output.data[i]);
    for (std::size_t i = 0; i < net.bias_hidden.size(); ++i) check(net.bias_hidden[i], g.wed_bias_hidden[i]);
    for (std::size_t i = 0; i < net.bias_output.size(); ++i) check(net.bias_output[i], g.wed_bias_output[i]);
  }
}

TEST(ApplyUpdate, SmallStepDescends) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto net = random_net(rng);
    net.eta = 0.01;
    const auto x = random_vec(rng, net.shape.inputs);
    const auto d = random_vec(rng, net.shape.outputs);
    const double before = half_sse(net, x, d);
    apply_update(net, backward(net, forward(net, x), d));
    EXPECT_LT(half_sse(net, x, d), before);
  }
}

TEST(Train, StoppingRules) {
  auto net = Network::random({2, 3, 1}, 0.5, 3);
  const auto pairs = xor_pairs();
  auto r = train(net, pairs, 0.5, 100, std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_TRUE(r.converged);

  auto zero = Network::zeros({1, 2, 1});
  const std::vector<TrainingPair> one{{{0.3}, {0.5}}};
  r = train(zero, one, 0.5, 100, 1e-12);
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0], 0.0);

  auto again = Network::random({2, 3, 1}, 0.5, 3);
  r = train(again, pairs, 0.5, 7, 0.0);
  EXPECT_EQ(r.history.size(), 7u);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(train(again, std::vector<TrainingPair>{}, 0.5, 5, 0.1), Error);
}

TEST(Train, XorConvergesDeterministically) {
  auto net = Network::random({2, 4, 1}, 0.5, 42);
  auto twin = net;
  const auto pairs = xor_pairs();
  const auto r = train(net, pairs, 0.5, 20000, 0.01);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.history.back(), 0.01);
  EXPECT_LE(r.history.size(), 20000u);
  EXPECT_EQ(mean_squared_error(net, pairs), r.history.back());
  train(twin, pairs, 0.5, 20000, 0.01);
  EXPECT_EQ(twin, net);
  for (const auto& p : pairs) EXPECT_EQ(gate(net, p.input), p.target[0] == 1.0);
  for (const auto& p : pairs) {
    const auto t = forward(net, p.input);
    for (double v : t.hidden_out) EXPECT_TRUE(v > 0 && v < 1);
  }
}

TEST(Gate, Rules) {
  auto net = Network::zeros({2, 2, 1});
  EXPECT_TRUE(gate(net, std::vector<double>{0.4, 0.1}));
  net.bias_output[0] = std::log(9.0);  // output 0.9
  EXPECT_TRUE(gate(net, std::vector<double>{0.0, 0.0}));
  net.bias_output[0] = -std::log(9.0);
  EXPECT_FALSE(gate(net, std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(gate(net, std::vector<double>{0.0, 0.0}, 0.05));
  EXPECT_THROW(gate(Network::zeros({2, 2, 2}), std::vector<double>{0, 0}), Error);
}

TEST(ModelFile, RoundTripIsLossless) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto net = random_net(rng);
    net.eta = rng.uniform(0.01, 1.0);
    EXPECT_EQ(parse_network(serialize_network(net)), net);
  }
  const auto path = std::filesystem::temp_directory_path() / "cafbp_test_model.txt";
  const auto net = Network::random({4, 8, 1}, 0.5, 42);
  save_network(net, path.string());
  EXPECT_EQ(load_network(path.string()), net);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_network("cafbp-bpnet 9\n"), Error);
  EXPECT_THROW(parse_network("cafbp-bpnet 1\nshape 1 1 1\neta 0.5\nseed 1\n0.1\n"), Error);
}

TEST(Init, SeededUniformRange) {
  const auto a = Network::random({5, 5, 5}, 0.5, 77);
  EXPECT_EQ(Network::random({5, 5, 5}, 0.5, 77), a);
  EXPECT_NE(Network::random({5, 5, 5}, 0.5, 78), a);
  for (double w : a.w_hidden.data) EXPECT_TRUE(w >= -0.5 && w <= 0.5);
  for (double w : a.bias_output) EXPECT_TRUE(w >= -0.5 && w <= 0.5);
}
