#include <doctest.h>

#include "oracles.hpp"
#include "sensprune/error.hpp"
#include "sensprune/network.hpp"
#include "test_util.hpp"

using namespace sensprune;

TEST_CASE("dense forward examples") {
  Network net;
  net.input_shape = {1};
  net.layers.push_back(DenseLayer{Matrix(1, 1, 1.0), {0.0}, Activation::relu()});
  CHECK(forward(net, Tensor({1}, {-1.0})).data == std::vector<double>{0.0});
  CHECK(forward_linear_part(net, 0, Tensor({1}, {-1.0})).data == std::vector<double>{-1.0});
  CHECK_THROWS_AS(forward(net, Tensor({2}, {1.0, 2.0})), Error);
  CHECK_THROWS_AS(forward_linear_part(net, 1, Tensor({1}, {1.0})), Error);
}

TEST_CASE("conv forward examples") {
  Network net;
  net.input_shape = {1, 2, 2};
  net.layers.push_back(ConvLayer{Tensor({1, 1, 1, 1}, {2.0}), {0.0}, Activation::relu()});
  const Tensor x({1, 2, 2}, {1, -1, 3, 0});
  const Tensor y = forward(net, x);
  CHECK(y.shape == Shape{1, 2, 2});
  CHECK(y.data == std::vector<double>{2, 0, 6, 0});

  Network line;
  line.input_shape = {1, 1, 5};
  line.layers.push_back(ConvLayer{Tensor({1, 1, 1, 3}, {1, 0, -1}), {0.0}, Activation::relu()});
  const Tensor in({1, 1, 5}, {1, 2, 3, 4, 5});
  CHECK(forward_linear_part(line, 0, in).data == std::vector<double>{-2, -2, -2});
  CHECK(forward(line, in).data == std::vector<double>{0, 0, 0});
}

TEST_CASE("conv forward agrees with the naive loop") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t ic = 1 + rng.next_u64() % 4, oc = 1 + rng.next_u64() % 4;
    const std::size_t h = 3 + rng.next_u64() % 6, w = 3 + rng.next_u64() % 6;
    const std::size_t kh = 1 + rng.next_u64() % 3, kw = 1 + rng.next_u64() % 3;
    ConvLayer c{Tensor({oc, ic, kh, kw}), std::vector<double>(oc), Activation::relu()};
    for (auto& v : c.kernels.data) v = rng.normal();
    for (auto& b : c.bias) b = rng.normal();
    if (trial % 3 == 1) c.stride_h = c.stride_w = 2;
    if (trial % 3 == 2) c.pad_h = c.pad_w = 1;
    Network net;
    net.input_shape = {ic, h, w};
    net.layers.push_back(c);
    Tensor x({ic, h, w});
    for (auto& v : x.data) v = rng.normal();
    const Tensor pre = forward_linear_part(net, 0, x, kernels::Exec::serial);
    const auto ref = oracle::naive_conv(x.data, ic, h, w, c.kernels.data, oc, kh, kw, c.bias,
                                        c.stride_h, c.stride_w, c.pad_h, c.pad_w);
    REQUIRE(pre.data.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(pre.data[i] - ref[i]) <= 1e-10);
    const Tensor post = forward(net, x, kernels::Exec::parallel);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(post.data[i] == std::max(0.0, pre.data[i]));
  }
}

TEST_CASE("dense forward agrees with per-neuron dot products") {
  const Network net = testutil::random_dense_net({6, 9, 4}, 3, Activation::sigmoid(), 0.5);
  Rng rng(1);
  const Tensor x = testutil::random_input({6}, rng);
  const auto& l0 = std::get<DenseLayer>(net.layers[0]);
  const auto& l1 = std::get<DenseLayer>(net.layers[1]);
  std::vector<double> h(9);
  for (std::size_t j = 0; j < 9; ++j)
    h[j] = Activation::sigmoid().eval(oracle::dot(l0.weights.row(j).data(), x.data.data(), 6) + l0.bias[j]);
  const Tensor z = forward_linear_part(net, 1, x);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(z.data[i] - (oracle::dot(l1.weights.row(i).data(), h.data(), 9) + l1.bias[i])) <= 1e-10);
  CHECK(forward(net, x, kernels::Exec::serial) == forward(net, x, kernels::Exec::parallel));
  CHECK(forward_prefix(net, 0, x) == x);
  CHECK(forward_prefix(net, 2, x) == forward(net, x));
}

TEST_CASE("shapes, flatten and prunable pairs") {
  Network net = testutil::random_conv_net({2, 3, 4}, 7, 7, 3, 1);
  net.layers.push_back(FlattenLayer{});
  DenseLayer d{Matrix(5, 4 * 3 * 3, 0.1), std::vector<double>(5, 0.0), Activation::relu()};
  net.layers.push_back(d);
  net.layers.push_back(DenseLayer{Matrix(2, 5, 0.1), {0, 0}, Activation::relu()});
  const auto shapes = layer_shapes(net);
  REQUIRE(shapes.size() == 6);
  CHECK(shapes[1] == Shape{3, 5, 5});
  CHECK(shapes[2] == Shape{4, 3, 3});
  CHECK(shapes[3] == Shape{36});
  CHECK(shapes[5] == Shape{2});
  CHECK(prunable_layers(net) == std::vector<std::size_t>{0, 3});
  CHECK(layer_width(net.layers[0]) == 3);
  CHECK(layer_width(net.layers[2]) == 0);
  CHECK(layer_width(net.layers[3]) == 5);
  CHECK_THROWS_AS(forward_linear_part(net, 2, Tensor({2, 7, 7})), Error);
  Rng rng(2);
  CHECK(forward(net, testutil::random_input({2, 7, 7}, rng)).shape == Shape{2});

  Network bad = net;
  std::get<DenseLayer>(bad.layers[3]).weights = Matrix(5, 35, 0.1);
  CHECK_THROWS_AS(validate(bad), Error);
  Network bad_beta = net;
  bad_beta.beta = std::vector<double>{1.0};
  CHECK_THROWS_AS(validate(bad_beta), Error);
  bad_beta.beta = std::vector<double>{1.0, -2.0};
  CHECK_THROWS_AS(validate(bad_beta), Error);
  bad_beta.beta = std::vector<double>{1.0, 2.0};
  CHECK_NOTHROW(validate(bad_beta));
}
