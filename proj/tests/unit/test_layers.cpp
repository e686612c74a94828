#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "hamnet/error.hpp"
#include "hamnet/nn/layers.hpp"
#include "hamnet/nn/optim.hpp"

using namespace hamnet;
using namespace hamnet::nn;
using doctest::Approx;

TEST_SUITE("layers") {
  TEST_CASE("conv identity kernel") {
    Rng rng(1);
    const auto x = test::random_tensor({5, 6, 1}, rng);
    Tensor w({3, 3, 1, 1});
    w[4] = 1.0;
    const auto y = conv2d_forward(x, w, Tensor({1}), nullptr);
    CHECK(y == x);
  }

  TEST_CASE("conv padding arithmetic") {
    const Tensor x({5, 5, 1}, 1.0);
    const Tensor w({3, 3, 1, 1}, 1.0);
    const auto y = conv2d_forward(x, w, Tensor({1}), nullptr);
    CHECK(y.at(2, 2, 0) == 9.0);
    CHECK(y.at(0, 0, 0) == 4.0);
    CHECK(y.at(4, 4, 0) == 4.0);
    CHECK(y.at(0, 2, 0) == 6.0);
  }

  TEST_CASE("conv shape errors") {
    const Tensor x({5, 5, 2});
    CHECK_THROWS_AS(conv2d_forward(x, Tensor({3, 3, 1, 4}), Tensor({4}), nullptr), Error);
    CHECK_THROWS_AS(conv2d_forward(x, Tensor({2, 2, 2, 4}), Tensor({4}), nullptr), Error);
    CHECK_THROWS_AS(conv2d_forward(x, Tensor({3, 3, 2, 4}), Tensor({3}), nullptr), Error);
  }

  TEST_CASE("maxpool") {
    const Tensor x({2, 2, 1}, std::vector<double>{1, 2, 3, 4});
    CHECK(maxpool2d_forward(x, nullptr) == Tensor({1, 1, 1}, std::vector<double>{4}));
    CHECK(maxpool2d_forward(Tensor({129, 61, 1}), nullptr).shape() == Shape{64, 30, 1});
    CHECK_THROWS_AS(maxpool2d_forward(Tensor({1, 4, 1}), nullptr), Error);

    // ties go to the earliest position in row-major order
    PoolCache cache;
    maxpool2d_forward(Tensor({2, 2, 1}, 5.0), &cache);
    const auto g = maxpool2d_backward(Tensor({1, 1, 1}, 1.0), cache);
    CHECK(g == Tensor({2, 2, 1}, std::vector<double>{1, 0, 0, 0}));
  }

  TEST_CASE("dense hand case") {
    const Tensor x({2}, std::vector<double>{1, 1});
    const Tensor w({2, 2}, std::vector<double>{1, 2, 3, 4});  // [in, units]
    const Tensor b({2}, std::vector<double>{0.5, -0.5});
    const auto y = dense_forward(x, w, b, nullptr);
    CHECK(y[0] == 4.5);
    CHECK(y[1] == 5.5);
    CHECK_THROWS_AS(dense_forward(Tensor({3}), w, b, nullptr), Error);
  }

  TEST_CASE("activations") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(std::isfinite(sigmoid(-800.0)));
    const Tensor v({4}, std::vector<double>{-3, -0.1, 0, 2});
    const auto r = activation_forward(ActivationKind::Relu, v);
    CHECK(r == Tensor({4}, std::vector<double>{0, 0, 0, 2}));
    const auto s = activation_forward(ActivationKind::Softmax, v);
    Tensor shifted = v;
    for (auto& x : shifted.values()) x += 1000.0;
    const auto s2 = activation_forward(ActivationKind::Softmax, shifted);
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(s[i] - s2[i]) < 1e-12);
      total += s[i];
    }
    CHECK(total == Approx(1.0));
  }

  TEST_CASE("losses") {
    const Tensor half({4}, 0.5);
    const Tensor t({4}, std::vector<double>{0, 1, 1, 0});
    CHECK(bce_loss(half, t).loss == Approx(std::log(2.0)).epsilon(1e-12));
    const Tensor exact({4}, std::vector<double>{kBceClamp, 1 - kBceClamp, 1 - kBceClamp, kBceClamp});
    const auto near = bce_loss(exact, t).loss;
    CHECK(near > 0.0);
    CHECK(near < 2e-7);
    const Tensor saturated({4}, std::vector<double>{0, 1, 1, 0});
    CHECK(bce_loss(saturated, t).loss == Approx(near));
    CHECK(std::isfinite(bce_loss(Tensor({4}, std::vector<double>{1, 0, 0, 1}), t).loss));
    CHECK(mse_loss(half, t).loss == Approx(0.25));
    CHECK_THROWS_AS(mse_loss(half, Tensor({3})), Error);
    CHECK_THROWS_AS(bce_loss(half, Tensor({3})), Error);
  }

  TEST_CASE("finite-difference checks per layer") {
    Rng rng(2024);
    for (const auto& c : {test::check_conv2d(rng, 5, 4, 2, 3, 3, 3), test::check_conv2d(rng, 3, 7, 1, 2, 1, 5),
                          test::check_maxpool(rng, 5, 6, 2), test::check_maxpool(rng, 4, 4, 1),
                          test::check_dense(rng, 7, 3),
                          test::check_activation(rng, ActivationKind::Relu, {3, 4, 2}),
                          test::check_activation(rng, ActivationKind::Sigmoid, {9}),
                          test::check_activation(rng, ActivationKind::Softmax, {2, 3, 5}),
                          test::check_loss(rng, LossKind::Bce, 6), test::check_loss(rng, LossKind::Mse, 6)}) {
      CAPTURE(c.what);
      CHECK(c.compared > 0);
      CHECK(c.max_rel_error < 1e-4);
    }
    CHECK(test::check_loss(rng, LossKind::Mse, 10).max_rel_error < 1e-6);
  }

  TEST_CASE("finite-difference check through a small model") {
    Rng rng(7);
    Model m({8, 6, 1}, {LayerSpec::conv2d(3), LayerSpec::act(ActivationKind::Relu), LayerSpec::maxpool2d(),
                        LayerSpec::flatten(), LayerSpec::dense(4), LayerSpec::act(ActivationKind::Sigmoid),
                        LayerSpec::dense(3), LayerSpec::act(ActivationKind::Softmax)});
    const auto c = test::check_model(rng, m, LossKind::Bce);
    CAPTURE(c.what);
    CHECK(c.max_rel_error < 1e-4);
  }

  TEST_CASE("adam") {
    ParamSet p{{Tensor({3}, std::vector<double>{1, -2, 3})}};
    const ParamSet g{{Tensor({3}, std::vector<double>{0.3, -5, 1e-3})}};
    auto state = AdamState::for_params(p);
    const AdamConfig cfg;
    adam_step(p, g, state, cfg);
    CHECK(p[0][0][0] == Approx(1 - 0.001).epsilon(1e-6));
    CHECK(p[0][0][1] == Approx(-2 + 0.001).epsilon(1e-6));
    CHECK(p[0][0][2] == Approx(3 - 0.001).epsilon(1e-4));

    ParamSet q{{Tensor({2}, std::vector<double>{4, 5})}};
    const auto before = q;
    auto s2 = AdamState::for_params(q);
    for (int i = 0; i < 100; ++i) adam_step(q, zeros_like(q), s2, cfg);
    CHECK(q == before);
  }
}
