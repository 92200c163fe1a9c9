// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "maskpf/estimator.hpp"
#include "maskpf/nn/loss.hpp"
#include "maskpf/nn/train.hpp"

using namespace maskpf;
using namespace maskpf::nn;
using test::kind_of;

namespace {

Tensor row(std::initializer_list<double> v) {
  Tensor t({1, v.size()});
  std::copy(v.begin(), v.end(), t.values().begin());
  return t;
}

ModelSpec small_ced() {
  ModelSpec s = ModelSpec::defaults(ModelKind::kCed);
  s.input_bins = 31;
  s.output_bins = 31;
  s.ced_channels = {2, 3, 2, 2};
  return s;
}

// Learnable toy task: the target mask is a smooth function of the features.
TrainingSet toy_set(std::uint64_t seed, std::size_t utts, std::size_t frames, std::size_t bins) {
  Rng rng(seed);
  TrainingSet set;
  for (std::size_t u = 0; u < utts; ++u) {
    Matrix f(frames, bins), m(frames, bins), c(frames, bins);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      f.data[i] = rng.normal();
      m.data[i] = 2.0 / (1.0 + std::exp(-f.data[i]));
      c.data[i] = rng.uniform(0.5, 2.0);
    }
    set.add(std::move(f), std::move(m), std::move(c));
  }
  return set;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("log-MSE loss values") {
    const Tensor c = row({1.0, 2.0, 0.5});
    const Tensor m = row({0.3, 1.0, 1.9});
    CHECK(loss_log_mse(m, m, c).value == 0.0);
    CHECK(loss_log_mse(row({std::exp(1.0)}), row({1.0}), row({1.0})).value == doctest::Approx(1.0).epsilon(1e-15));

    const Tensor p = row({0.7, 1.4, 0.2});
    Tensor c2 = c;
    for (std::size_t i = 0; i < c2.size(); ++i) c2[i] *= 37.0;
    CHECK(loss_log_mse(p, m, c2).value == doctest::Approx(loss_log_mse(p, m, c).value).epsilon(1e-12));
    CHECK(kind_of([&] { loss_log_mse(p, row({1.0}), c); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("log-MSE gradient matches finite differences") {
    Tensor p = row({0.7, 1.4, 0.2, 1.1});
    const Tensor m = row({0.3, 1.0, 1.9, 1.1});
    const Tensor c = row({1.0, 2.0, 0.5, 3.0});
    const auto l = loss_log_mse(p, m, c);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + 1e-6;
      const double up = loss_log_mse(p, m, c).value;
      p[i] = orig - 1e-6;
      const double down = loss_log_mse(p, m, c).value;
      p[i] = orig;
      CHECK(l.grad[i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-6));
    }
  }

  TEST_CASE("loss depends only on the masks when no floor engages") {
    Rng rng(3);
    Tensor p({8, 205}), m({8, 205}), c({8, 205});
    double direct = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.uniform(0.01, 1.99);
      m[i] = rng.uniform(0.01, 2.0);
      c[i] = std::exp(4.0 * rng.normal());
      const double d = std::log(m[i]) - std::log(p[i]);
      direct += d * d;
    }
    CHECK(std::abs(loss_log_mse(p, m, c).value - direct / p.size()) <= 1e-10);
  }

  TEST_CASE("first ADAM step moves by the learning rate") {
    ParamStore store;
    Param& w = store.add("w", {1});
    w.value[0] = 0.5;
    w.grad[0] = 1.0;
    TrainConfig cfg;
    adam_step(store, cfg);
    CHECK(w.value[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-9));
    CHECK(store.step == 1);

    ParamStore zero;
    Param& z = zero.add("z", {3});
    z.value.fill(0.25);
    adam_step(zero, cfg);
    for (std::size_t i = 0; i < 3; ++i) CHECK(z.value[i] == 0.25);
  }

  TEST_CASE("non-finite gradient names the tensor") {
    ParamStore store;
    store.add("ok", {2});
    Param& bad = store.add("layer.bad", {2});
    bad.grad[1] = std::nan("");
    try {
      adam_step(store, TrainConfig{});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumeric);
      CHECK(std::string(e.what()).find("layer.bad") != std::string::npos);
    }
  }

  TEST_CASE("moving statistics are not touched by ADAM") {
    ParamStore store;
    Param& s = store.add("bn.moving_mean", {2}, ParamRole::kMovingStat);
    s.value.fill(3.0);
    adam_step(store, TrainConfig{});
    CHECK(s.value[0] == 3.0);
  }

  TEST_CASE("context windows replicate the first frame") {
    Matrix f(3, 2);
    for (std::size_t i = 0; i < 6; ++i) f.data[i] = static_cast<double>(i);
    std::vector<double> w(8);
    context_window(f, 0, 4, w.data());
    CHECK(w == std::vector<double>{0, 1, 0, 1, 0, 1, 0, 1});
    context_window(f, 2, 4, w.data());
    CHECK(w == std::vector<double>{0, 1, 0, 1, 2, 3, 4, 5});
  }

  TEST_CASE("training reduces the loss and is reproducible") {
    const TrainingSet train_set = toy_set(1, 3, 40, 31);
    const TrainingSet val_set = toy_set(2, 1, 40, 31);
    TrainConfig cfg;
    cfg.max_epochs = 12;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 16;
    cfg.seed = 5;
    auto a = MaskNet::build(small_ced(), 5);
    const auto ra = train(*a, cfg, train_set, val_set);
    CHECK(ra.log.back().train_loss < ra.log.front().train_loss);
    CHECK(ra.best_val_loss < ra.log.front().val_loss);
    // Restored parameters reproduce the best validation loss.
    CHECK(evaluate_loss(*a, val_set) == doctest::Approx(ra.best_val_loss).epsilon(1e-12));
    CHECK(evaluate_loss(*a, val_set) <= ra.log.back().val_loss + 1e-12);

    auto b = MaskNet::build(small_ced(), 5);
    const auto rb = train(*b, cfg, train_set, val_set);
    CHECK(a->params().snapshot() == b->params().snapshot());
    REQUIRE(ra.log.size() == rb.log.size());
    for (std::size_t i = 0; i < ra.log.size(); ++i) {
      CHECK(ra.log[i].train_loss == rb.log[i].train_loss);
      CHECK(ra.log[i].val_loss == rb.log[i].val_loss);
    }
  }

  TEST_CASE("early stopping with frozen parameters") {
    const TrainingSet train_set = toy_set(3, 2, 30, 31);
    const TrainingSet val_set = toy_set(4, 1, 30, 31);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.bn_momentum = 1.0;
    cfg.patience = 3;
    cfg.max_epochs = 30;
    auto net = MaskNet::build(small_ced(), 1);
    const auto before = net->params().snapshot();
    const auto r = train(*net, cfg, train_set, val_set);
    CHECK(r.val_evaluations == 4);
    CHECK(r.log.size() == 4);
    CHECK(r.best_epoch == 0);
    CHECK(net->params().snapshot() == before);
  }

  TEST_CASE("training input validation") {
    TrainConfig cfg;
    cfg.batch_size = 1;
    CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::kInvalidConfig);
    auto net = MaskNet::build(small_ced(), 1);
    CHECK(kind_of([&] { train(*net, TrainConfig{}, TrainingSet{}, toy_set(1, 1, 5, 31)); }) ==
          ErrorKind::kEmptyInput);
    CHECK(kind_of([&] { train(*net, TrainConfig{}, toy_set(1, 1, 5, 31), TrainingSet{}); }) ==
          ErrorKind::kEmptyInput);
  }

  TEST_CASE("infer_masks pads the start and is repeatable") {
    ModelSpec s = ModelSpec::defaults(ModelKind::kFcnn);
    s.fcnn_hidden = 16;
    auto net = MaskNet::build(s, 3);
    Matrix one(1, 205);
    Rng rng(2);
    for (auto& v : one.data) v = rng.normal();
    const MaskMatrix m = infer_masks(*net, one);
    CHECK(m.values.rows == 1);
    CHECK(m.values.cols == 205);
    CHECK(m.kind == MaskKind::kPredicted);

    // Single frame == same frame replicated four times.
    Tensor x({1, 4, 205});
    for (std::size_t j = 0; j < 4; ++j) std::copy(one.data.begin(), one.data.end(), x.data() + j * 205);
    const Tensor y = net->forward(x, {});
    for (std::size_t k = 0; k < 205; ++k) CHECK(m.values(0, k) == y[k]);

    Matrix many(37, 205);
    for (auto& v : many.data) v = rng.normal();
    const MaskMatrix a = infer_masks(*net, many, 8);
    const MaskMatrix b = infer_masks(*net, many);
    CHECK(a.values.data == b.values.data);
    for (double v : a.values.data) CHECK((v > 0.0 && v < 2.0));
    CHECK(kind_of([&] { infer_masks(*net, Matrix()); }) == ErrorKind::kEmptyInput);
  }
}
