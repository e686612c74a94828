#include <doctest.h>

#include <set>

#include "hamnet/error.hpp"
#include "hamnet/nn/kfold.hpp"
#include "hamnet/nn/model.hpp"
#include "hamnet/rng.hpp"

using namespace hamnet;
using namespace hamnet::nn;

TEST_SUITE("model") {
  TEST_CASE("classifier geometry") {
    const auto m = build_classifier({129, 61, 1});
    std::size_t flatten_at = 0;
    for (std::size_t i = 0; i < m.layers().size(); ++i) {
      if (m.layers()[i].kind == LayerKind::Flatten) flatten_at = i;
    }
    CHECK(m.layer_output_shape(flatten_at) == Shape{128 * 16 * 7});
    CHECK(128 * 16 * 7 == 14336);
    CHECK(m.layer_parameter_count(0) == 320);
    CHECK(m.output_shape() == Shape{1});
    CHECK(build_classifier({129, 61, 1}, 5).output_shape() == Shape{5});
    CHECK(build_classifier({129, 61, 1}, 5).layers().back().activation == ActivationKind::Softmax);
    CHECK_THROWS_AS(build_classifier({7, 61, 1}), Error);
    CHECK_THROWS_AS(build_classifier({129, 61, 1}, 0), Error);
  }

  TEST_CASE("parameter counts follow the formulae") {
    const auto m = build_classifier({129, 61, 1});
    std::size_t total = 0;
    for (std::size_t i = 0; i < m.layers().size(); ++i) total += m.layer_parameter_count(i);
    const std::size_t expected = (3 * 3 * 1 * 32 + 32) + (3 * 3 * 32 * 64 + 64) + (3 * 3 * 64 * 128 + 128) +
                                 (14336 * 128 + 128) + (128 * 1 + 1);
    CHECK(total == expected);
    CHECK(m.parameter_count() == expected);
  }

  TEST_CASE("denoiser keeps the input shape") {
    for (const Shape& s : {Shape{129, 64, 1}, Shape{8, 8, 1}, Shape{20, 9, 1}}) {
      const auto d = build_denoiser(s);
      CHECK(d.output_shape() == s);
      CHECK(d.predict(Tensor(s, 0.5)).shape() == s);
    }
    CHECK_THROWS_AS(build_denoiser({129, 7, 1}), Error);
  }

  TEST_CASE("non-composing stacks are rejected with the layer index") {
    try {
      Model({4, 4, 1}, {LayerSpec::flatten(), LayerSpec::conv2d(2)});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
    CHECK_THROWS_AS(Model({4, 4, 1}, {LayerSpec::conv2d(2, 2, 3)}), Error);
    CHECK_THROWS_AS(Model({4, 4, 1}, {LayerSpec::dense(3)}), Error);
    CHECK_THROWS_AS(Model({4, 4, 1}, {LayerSpec::flatten(), LayerSpec::dense(0)}), Error);
    CHECK_THROWS_AS(Model({1, 4, 1}, {LayerSpec::maxpool2d()}), Error);
  }

  TEST_CASE("initialisation is seeded") {
    auto a = build_classifier({16, 16, 1});
    auto b = build_classifier({16, 16, 1});
    a.initialize(3);
    b.initialize(3);
    CHECK(a.params() == b.params());
    b.initialize(4);
    CHECK(a.params() != b.params());
    for (const auto& layer : a.params()) {
      if (layer.size() == 2) {
        for (double v : layer[1].values()) CHECK(v == 0.0);
      }
    }
  }

  TEST_CASE("kfold examples") {
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i % 2);
    const auto folds = kfold_split(labels, 5, 1);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> all;
    for (const auto& f : folds) {
      std::size_t ones = 0;
      for (auto i : f) {
        ones += labels[i];
        CHECK(all.insert(i).second);
      }
      CHECK(f.size() == 20);
      CHECK(ones == 10);
    }
    CHECK(all.size() == 100);

    std::vector<int> small(14);
    for (int i = 7; i < 14; ++i) small[i] = 1;
    const auto two = kfold_split(small, 2, 9);
    for (const auto& f : two) {
      std::size_t ones = 0;
      for (auto i : f) ones += small[i];
      CHECK((ones == 3 || ones == 4));
      CHECK(f.size() == 7);
    }
  }

  TEST_CASE("kfold errors and determinism") {
    const std::vector<int> labels{0, 0, 0, 1, 1};
    try {
      kfold_split(labels, 3, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("class 1") != std::string::npos);
    }
    CHECK_THROWS_AS(kfold_split(labels, 1, 1), Error);
    Rng rng(4);
    std::vector<int> many(60);
    for (auto& l : many) l = static_cast<int>(rng.below(3));
    CHECK(kfold_split(many, 4, 8) == kfold_split(many, 4, 8));
  }
}
