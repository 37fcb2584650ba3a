#include <doctest.h>

#include "grad_check.hpp"
#include "mostv/errors.hpp"
#include "mostv/vgg.hpp"

using namespace mostv;

namespace {

int conv_count(const CnnConfig& c) { return static_cast<int>(c.convs.size()); }

CnnConfig tiny_config() {
  // Reduced-width variant with the same structure, for double-precision checks.
  CnnConfig c;
  c.duration_level = 7;
  c.convs = {{4, true}, {6, true}, {8, false}, {8, true}};
  c.fc_widths = {10, 6, 2};
  c.dropout = 0.25;
  c.input_size = 16;
  c.input_channels = 1;
  return c;
}

}  // namespace

TEST_CASE("depth 13 is ten convs plus the three-layer head") {
  const CnnConfig c = build_vgg_config(13);
  CHECK(conv_count(c) == 10);
  CHECK(c.fc_widths.size() == 3);
  CHECK(c.weighted_layers() == 13);
}

TEST_CASE("depth 7 is four convs plus the three-layer head") {
  const CnnConfig c = build_vgg_config(7);
  CHECK(conv_count(c) == 4);
  CHECK(c.fc_widths.size() == 3);
  CHECK(c.weighted_layers() == 7);
}

TEST_CASE("9 is a strict conv prefix of 11, two layers shorter") {
  const CnnConfig c9 = build_vgg_config(9);
  const CnnConfig c11 = build_vgg_config(11);
  REQUIRE(conv_count(c11) == conv_count(c9) + 2);
  for (int i = 0; i < conv_count(c9); ++i) {
    CHECK(c9.convs[i].out_channels == c11.convs[i].out_channels);
    CHECK(c9.convs[i].pool_after == c11.convs[i].pool_after);
  }
}

TEST_CASE("truncation chain nests: 7 within 9 within 11") {
  const CnnConfig c7 = build_vgg_config(7);
  const CnnConfig c9 = build_vgg_config(9);
  for (int i = 0; i < conv_count(c7); ++i)
    CHECK(c7.convs[i].out_channels == c9.convs[i].out_channels);
  CHECK(conv_count(c9) == conv_count(c7) + 2);
}

TEST_CASE("unsupported depth level raises a config error") {
  CHECK_THROWS_AS(build_vgg_config(8), ConfigError);
  CHECK_THROWS_AS(build_vgg_config(16), ConfigError);
}

TEST_CASE("all-zero weights give zero logits and a false prediction") {
  VggNet<double> net(tiny_config());  // weights default to zero
  Tensor<double> images({2, 1, 16, 16});
  Rng rng(31);
  fill_uniform(images, rng, 0.0, 1.0);
  const Tensor<double>& logits = net.forward(images, false, nullptr);
  for (int64_t i = 0; i < logits.numel(); ++i) CHECK(logits.data[i] == 0.0);
  for (int p : net.predictions()) CHECK(p == 0);  // ties resolve to "false"
}

TEST_CASE("duplicate images in a batch give identical logits in eval mode") {
  VggNet<double> net(tiny_config());
  Rng rng(32);
  net.init(rng);
  Tensor<double> one({1, 1, 16, 16});
  fill_uniform(one, rng, 0.0, 1.0);
  Tensor<double> batch({3, 1, 16, 16});
  for (int i = 0; i < 3; ++i)
    std::copy(one.data.begin(), one.data.end(), batch.data.begin() + i * 256);
  const Tensor<double>& logits = net.forward(batch, false, nullptr);
  for (int i = 1; i < 3; ++i) {
    CHECK(logits.data[2 * i] == logits.data[0]);
    CHECK(logits.data[2 * i + 1] == logits.data[1]);
  }
}

TEST_CASE("tiny-width depth-7 variant: analytic gradients match finite differences") {
  VggNet<double> net(tiny_config());
  Rng rng(33);
  net.init(rng);
  Tensor<double> images({2, 1, 16, 16});
  fill_uniform(images, rng, 0.0, 1.0);
  const std::vector<int> labels = {1, 0};

  auto loss_fn = [&]() {
    const Tensor<double>& logits = net.forward(images, false, nullptr);
    return static_cast<double>(softmax_cross_entropy<double>(logits, labels, nullptr));
  };

  const Tensor<double>& logits = net.forward(images, false, nullptr);
  Tensor<double> dlogits;
  softmax_cross_entropy<double>(logits, labels, &dlogits);
  for (Param<double>* p : net.params()) p->grad.zero();
  net.backward(dlogits);
  CHECK(mostv_test::max_grad_rel_error(net.params(), loss_fn, 1e-5, 4) < 1e-4);
}

TEST_CASE("input shape mismatch raises a config error") {
  VggNet<double> net(tiny_config());
  Tensor<double> wrong({1, 1, 8, 8});
  CHECK_THROWS_AS(net.forward(wrong, false, nullptr), ConfigError);
}
