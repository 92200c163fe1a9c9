// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "maskpf/error.hpp"
#include "maskpf/kernels.hpp"
#include "maskpf/nn/loss.hpp"

namespace maskpf::nn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || batch_size < 2) {
    throw Error(ErrorKind::kInvalidConfig, "learning_rate must be >= 0 and batch_size >= 2");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "ADAM betas must lie in [0, 1) and eps must be positive");
  }
  if (max_epochs == 0 || patience == 0 || !(min_delta >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "max_epochs and patience must be positive, min_delta >= 0");
  }
  if (!(bn_momentum >= 0.0 && bn_momentum <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "bn_momentum must lie in [0, 1]");
  }
}

void adam_step(ParamStore& params, const TrainConfig& cfg) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    if (p.role != ParamRole::kTrainable) continue;
    for (std::size_t j = 0; j < p.grad.size(); ++j) {
      if (!std::isfinite(p.grad[j])) throw Error(ErrorKind::kNumeric, "non-finite gradient in " + p.name);
    }
  }
  params.step += 1;
  const double t = static_cast<double>(params.step);
  const kernels::AdamCoefficients c{cfg.learning_rate / (1.0 - std::pow(cfg.beta1, t)), cfg.beta1, cfg.beta2,
                                    cfg.adam_eps, 1.0 - std::pow(cfg.beta2, t)};
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    if (p.role != ParamRole::kTrainable) continue;
    k.adam(p.value.data(), p.adam_m.data(), p.adam_v.data(), p.grad.data(), p.value.size(), c);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      if (!std::isfinite(p.value[j])) throw Error(ErrorKind::kNumeric, "non-finite value in " + p.name);
    }
  }
}

void context_window(const Matrix& features, std::size_t t, std::size_t context, double* out) {
  const std::size_t bins = features.cols;
  for (std::size_t j = 0; j < context; ++j) {
    const std::size_t back = context - 1 - j;
    const std::size_t src = t >= back ? t - back : 0;
    std::copy_n(features.data.data() + src * bins, bins, out + j * bins);
  }
}

void TrainingSet::add(Matrix features, Matrix target_mask, Matrix coded_mag) {
  if (features.rows != target_mask.rows) {
    throw Error(ErrorKind::kInvalidInput, "feature/target frame mismatch");
  }
  if (!target_mask.same_shape(coded_mag)) throw Error(ErrorKind::kInvalidInput, "target/magnitude shape mismatch");
  if (!utts_.empty() && (features.cols != utts_[0].features.cols || target_mask.cols != utts_[0].target_mask.cols)) {
    throw Error(ErrorKind::kInvalidInput, "inconsistent bin counts across utterances");
  }
  const std::size_t u = utts_.size();
  for (std::size_t t = 0; t < features.rows; ++t) index_.emplace_back(u, t);
  utts_.push_back({std::move(features), std::move(target_mask), std::move(coded_mag)});
}

TrainingSet::Batch TrainingSet::gather(std::span<const std::size_t> examples, std::size_t context) const {
  if (utts_.empty()) throw Error(ErrorKind::kEmptyInput, "empty training set");
  const std::size_t n = examples.size();
  const std::size_t in_bins = utts_[0].features.cols;
  const std::size_t out_bins = utts_[0].target_mask.cols;
  Batch b{Tensor({n, context, in_bins}), Tensor({n, out_bins}), Tensor({n, out_bins})};
  for (std::size_t i = 0; i < n; ++i) {
    const auto [u, t] = index_.at(examples[i]);
    const Utt& utt = utts_[u];
    context_window(utt.features, t, context, b.features.data() + i * context * in_bins);
    std::copy_n(utt.target_mask.data.data() + t * out_bins, out_bins, b.target_mask.data() + i * out_bins);
    std::copy_n(utt.coded_mag.data.data() + t * out_bins, out_bins, b.coded_mag.data() + i * out_bins);
  }
  return b;
}

double evaluate_loss(MaskNet& net, const TrainingSet& set, std::size_t batch_size) {
  if (set.empty()) throw Error(ErrorKind::kEmptyInput, "cannot evaluate an empty set");
  const ForwardContext ctx{Mode::kInfer, nullptr, 0.9};
  std::vector<std::size_t> idx;
  double weighted = 0.0;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, set.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    const auto batch = set.gather(idx, net.spec().context_frames);
    const Tensor out = net.forward(batch.features, ctx);
    weighted += loss_log_mse(out, batch.target_mask, batch.coded_mag).value * static_cast<double>(n);
  }
  return weighted / static_cast<double>(set.size());
}

TrainResult train(MaskNet& net, const TrainConfig& cfg, const TrainingSet& train_set, const TrainingSet& val_set,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  if (train_set.size() < 2) throw Error(ErrorKind::kEmptyInput, "training set needs at least two frames");
  if (val_set.empty()) throw Error(ErrorKind::kEmptyInput, "validation set is empty");

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  auto check = [](double loss, const char* what) {
    if (!std::isfinite(loss)) throw Error(ErrorKind::kNumeric, fmt::format("{} loss is not finite", what));
  };

  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  Rng dropout_rng(mix_seed(cfg.seed, 2));
  ParamStore& params = net.params();

  TrainResult result;
  EpochLog base{0, evaluate_loss(net, train_set), evaluate_loss(net, val_set), elapsed()};
  check(base.train_loss, "training");
  check(base.val_loss, "validation");
  result.log.push_back(base);
  result.best_val_loss = base.val_loss;
  result.val_evaluations = 1;
  if (on_epoch) on_epoch(base);
  auto best = params.snapshot();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const ForwardContext ctx{Mode::kTrain, &dropout_rng, cfg.bn_momentum};
  std::size_t waited = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      const auto batch = train_set.gather(std::span(order).subspan(start, n), net.spec().context_frames);
      params.zero_grad();
      const Tensor out = net.forward(batch.features, ctx);
      const LossResult loss = loss_log_mse(out, batch.target_mask, batch.coded_mag);
      check(loss.value, "training");
      net.backward(loss.grad);
      adam_step(params, cfg);
      loss_sum += loss.value * static_cast<double>(n);
      seen += n;
    }
    EpochLog entry{epoch, loss_sum / static_cast<double>(seen), evaluate_loss(net, val_set), elapsed()};
    check(entry.val_loss, "validation");
    result.log.push_back(entry);
    result.val_evaluations += 1;
    if (on_epoch) on_epoch(entry);

    if (entry.val_loss < result.best_val_loss - cfg.min_delta) {
      result.best_val_loss = entry.val_loss;
      result.best_epoch = epoch;
      best = params.snapshot();
      waited = 0;
    } else if (++waited >= cfg.patience) {
      break;
    }
  }
  params.restore(best);
  return result;
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "epoch,train_loss,val_loss,elapsed_s\n";
  for (const auto& e : log) {
    out << fmt::format("{},{:.10g},{:.10g},{:.3f}\n", e.epoch, e.train_loss, e.val_loss, e.elapsed_s);
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace maskpf::nn
