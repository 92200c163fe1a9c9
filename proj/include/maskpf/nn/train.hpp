// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "maskpf/matrix.hpp"
#include "maskpf/nn/models.hpp"
#include "maskpf/nn/params.hpp"

namespace maskpf::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t patience = 5;
  double min_delta = 1e-4;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 0;
  double bn_momentum = 0.9;  // 1.0 freezes batch-norm moving statistics
  bool modified_target = true;

  void validate() const;
};

/// One bias-corrected ADAM update of every trainable tensor from its
/// accumulated gradient. Throws a numeric error naming the first tensor whose
/// gradient or updated value is not finite.
void adam_step(ParamStore& params, const TrainConfig& cfg);

/// Writes the causal context window ending at frame t (oldest frame first)
/// into out[context * bins]; frames before the start replicate frame 0.
void context_window(const Matrix& features, std::size_t t, std::size_t context, double* out);

/// Frame-level training examples grouped by utterance.
class TrainingSet {
 public:
  /// features: normalized log-magnitudes; target_mask and coded_mag give the
  /// loss terms. All three are frames x bins.
  void add(Matrix features, Matrix target_mask, Matrix coded_mag);

  std::size_t size() const { return index_.size(); }
  std::size_t utterances() const { return utts_.size(); }
  bool empty() const { return index_.empty(); }

  struct Batch {
    Tensor features;     // [N, context, bins]
    Tensor target_mask;  // [N, bins]
    Tensor coded_mag;    // [N, bins]
  };
  Batch gather(std::span<const std::size_t> examples, std::size_t context) const;

 private:
  struct Utt {
    Matrix features, target_mask, coded_mag;
  };
  std::vector<Utt> utts_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;  // (utterance, frame)
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double elapsed_s = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;  // entry 0 is the pre-training baseline
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::size_t val_evaluations = 0;
};

/// Mean loss over a set in infer mode.
double evaluate_loss(MaskNet& net, const TrainingSet& set, std::size_t batch_size = 256);

/// Epoch loop with seeded shuffling and early stopping on validation loss.
/// On return the network holds the parameters of the best validation epoch.
TrainResult train(MaskNet& net, const TrainConfig& cfg, const TrainingSet& train_set, const TrainingSet& val_set,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// CSV with header epoch,train_loss,val_loss,elapsed_s.
void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace maskpf::nn
