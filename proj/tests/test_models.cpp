// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "maskpf/nn/models.hpp"

using namespace maskpf;
using namespace maskpf::nn;
using test::kind_of;

namespace {

ModelSpec tiny(ModelKind kind) {
  ModelSpec s = ModelSpec::defaults(kind);
  s.input_bins = 31;
  s.output_bins = kind == ModelKind::kCed ? 31 : 7;
  s.fcnn_hidden = 6;
  s.lstm_units1 = 5;
  s.lstm_units2 = 4;
  s.ced_channels = {2, 3, 2, 2};
  if (kind == ModelKind::kLstm) s.context_frames = 4;
  return s;
}

Tensor random_input(const ModelSpec& s, std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Tensor x({n, s.context_frames, s.input_bins});
  Rng rng(seed);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = scale * rng.normal();
  return x;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("default context sizes") {
    CHECK(ModelSpec::defaults(ModelKind::kFcnn).context_frames == 4);
    CHECK(ModelSpec::defaults(ModelKind::kLstm).context_frames == 10);
    CHECK(ModelSpec::defaults(ModelKind::kCed).context_frames == 6);
    CHECK(parse_model_kind("lstm") == ModelKind::kLstm);
    CHECK(kind_of([] { parse_model_kind("rnn"); }) == ErrorKind::kInvalidConfig);
  }

  TEST_CASE("parameter counts") {
    const auto fcnn = MaskNet::build(ModelSpec::defaults(ModelKind::kFcnn), 1);
    CHECK(param_count(fcnn->params()) == 2108621);
    CHECK(param_count(fcnn->params()) ==
          820u * 1024 + 1024 + 1024u * 1024 + 1024 + 1024u * 205 + 205 + 2u * 1024 * 4);

    const auto lstm = MaskNet::build(ModelSpec::defaults(ModelKind::kLstm), 1);
    const std::size_t lstm_expected = 4u * 400 * (205 + 400 + 1) + 4u * 205 * (400 + 205 + 1) + 205u * 205 + 205;
    CHECK(param_count(lstm->params()) == lstm_expected);
    MESSAGE("lstm parameters: " << param_count(lstm->params()));

    const auto ced = MaskNet::build(ModelSpec::defaults(ModelKind::kCed), 1);
    MESSAGE("ced parameters: " << param_count(ced->params()));
    CHECK(param_count(ced->params()) == 146444);
  }

  TEST_CASE("ced shape chain") {
    const auto ced = MaskNet::build(ModelSpec::defaults(ModelKind::kCed), 3);
    const Tensor y = ced->forward(random_input(ced->spec(), 2, 4), {});
    CHECK(y.shape() == std::vector<std::size_t>{2, 205});
    const auto trace = ced->shape_trace();
    auto shape_of = [&](const std::string& name) {
      for (const auto& t : trace) {
        if (t.layer == name) return t.shape;
      }
      FAIL("missing layer " << name);
      return std::array<std::size_t, 3>{};
    };
    using S = std::array<std::size_t, 3>;
    CHECK(shape_of("Conv2d_1") == S{16, 5, 102});
    CHECK(shape_of("Conv2d_2") == S{32, 4, 50});
    CHECK(shape_of("Conv2d_3") == S{64, 3, 24});
    CHECK(shape_of("Conv2d_4") == S{128, 2, 11});
    CHECK(shape_of("Deconv2d_1") == S{64, 3, 23});
    CHECK(shape_of("Deconv2d_2") == S{32, 4, 49});
    CHECK(shape_of("Deconv2d_3") == S{16, 5, 101});
    CHECK(shape_of("Deconv2d_4") == S{1, 6, 205});
    CHECK(shape_of("Conv2d_5") == S{1, 1, 205});
  }

  TEST_CASE("outputs stay inside (0, 2)") {
    for (auto kind : {ModelKind::kFcnn, ModelKind::kLstm, ModelKind::kCed}) {
      const auto net = MaskNet::build(tiny(kind), 5);
      for (double scale : {1.0, 1e3, 1e8}) {
        const Tensor y = net->forward(random_input(net->spec(), 4, 6, scale), {});
        for (std::size_t i = 0; i < y.size(); ++i) {
          CHECK(y[i] > 0.0);
          CHECK(y[i] < 2.0);
        }
      }
    }
  }

  TEST_CASE("inference is repeatable and builds are seeded") {
    for (auto kind : {ModelKind::kFcnn, ModelKind::kLstm, ModelKind::kCed}) {
      const auto a = MaskNet::build(tiny(kind), 9);
      const auto b = MaskNet::build(tiny(kind), 9);
      const auto c = MaskNet::build(tiny(kind), 10);
      CHECK(a->params().snapshot() == b->params().snapshot());
      CHECK(a->params().snapshot() != c->params().snapshot());
      const Tensor x = random_input(a->spec(), 3, 1);
      CHECK(a->forward(x, {}).values() == a->forward(x, {}).values());
    }
  }

  TEST_CASE("zeroed output layer gives unity masks") {
    const auto net = MaskNet::build(tiny(ModelKind::kFcnn), 2);
    net->params().find("fcnn.output.weight")->value.fill(0.0);
    net->params().find("fcnn.output.bias")->value.fill(0.0);
    const Tensor y = net->forward(random_input(net->spec(), 2, 3), {});
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 1.0);
  }

  TEST_CASE("whole-network gradients") {
    for (auto kind : {ModelKind::kFcnn, ModelKind::kLstm, ModelKind::kCed}) {
      const auto net = MaskNet::build(tiny(kind), 12);
      const auto r = test::check_model(*net, 13);
      INFO(to_string(kind) << " worst " << r.worst << " rel err " << r.max_rel_err);
      CHECK(r.max_rel_err <= 1e-4);
    }
  }

  TEST_CASE("zero loss gives zero gradients") {
    const auto net = MaskNet::build(tiny(ModelKind::kCed), 4);
    const Tensor x = random_input(net->spec(), 3, 5);
    Rng rng(1);
    const Tensor y = net->forward(x, ForwardContext{Mode::kTrain, &rng, 0.9});
    Tensor coded(y.shape(), 0.7);
    net->params().zero_grad();
    const auto l = loss_log_mse(y, y, coded);
    CHECK(l.value == 0.0);
    net->backward(l.grad);
    for (std::size_t i = 0; i < net->params().size(); ++i) {
      const Param& p = net->params()[i];
      if (p.role != ParamRole::kTrainable) continue;
      for (std::size_t j = 0; j < p.grad.size(); ++j) CHECK(std::abs(p.grad[j]) <= 1e-12);
    }
  }

  TEST_CASE("invalid specs and inputs") {
    ModelSpec s = ModelSpec::defaults(ModelKind::kCed);
    s.input_bins = 20;
    s.output_bins = 20;
    CHECK(kind_of([&] { MaskNet::build(s, 1); }) == ErrorKind::kInvalidConfig);
    s = ModelSpec::defaults(ModelKind::kCed);
    s.output_bins = 100;
    CHECK(kind_of([&] { MaskNet::build(s, 1); }) == ErrorKind::kInvalidConfig);

    const auto net = MaskNet::build(tiny(ModelKind::kFcnn), 1);
    CHECK(kind_of([&] { net->forward(Tensor({2, 3, 31}), {}); }) == ErrorKind::kInvalidInput);
  }
}
