// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maskpf/audio.hpp"
#include "maskpf/degrade.hpp"
#include "maskpf/detail/parallel.hpp"
#include "maskpf/manifest.hpp"
#include "maskpf/mask.hpp"
#include "maskpf/metrics.hpp"
#include "maskpf/nn/models.hpp"
#include "maskpf/nn/train.hpp"

namespace maskpf {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Options shared by every command.
struct RunOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool preprocess = true;  // band_limit + level_normalize on ingestion
  std::size_t max_lag = 800;
  bool quiet = false;  // suppress console summaries
};

struct UtterancePair {
  std::string id;
  std::string split;
  std::string source;  // preset name, or "file" for external coded audio
  AudioBuffer clean;
  AudioBuffer coded;
};

/// Resolves one manifest record into an aligned, equal-length pair.
/// Surrogate records: clean -> band_limit -> level_normalize -> surrogate_code
/// -> band_limit. File records: cross-correlation alignment, band_limit on
/// both, and the clean signal's level scale applied to both.
UtterancePair load_record(const Manifest& manifest, const ManifestRecord& record, const RunOptions& opts);

/// All records of a split (empty name: every record), in manifest order.
std::vector<UtterancePair> load_split(const Manifest& manifest, std::string_view split, const RunOptions& opts);

/// Seed of the surrogate degrader for one utterance id.
std::uint64_t record_seed(std::uint64_t run_seed, std::string_view id);

// ---------------------------------------------------------------- commands

struct StatsResult {
  std::vector<std::pair<std::string, MaskHistogram>> sources;  // first-appearance order
};

/// Unbounded-IRM histograms per coded source over every record. Writes
/// stats.csv (source,bucket,count,fraction).
StatsResult cmd_stats(const RunOptions& opts, const MaskConfig& mask);

struct OracleOptions {
  std::vector<double> bounds{1.0, 2.0, 4.0, 10.0, kUnbounded};
  bool include_cepstrum = true;
  std::size_t cepstrum_keep = 64;
  MaskConfig mask;
  std::string split;  // empty: all records
};

struct OracleResult {
  std::vector<std::string> utterances;
  std::vector<std::vector<OracleRow>> rows;  // per utterance
  std::vector<OracleRow> means;
};

/// Writes oracle.csv with per-utterance rows followed by __mean__ rows.
OracleResult cmd_oracle(const RunOptions& opts, const OracleOptions& oracle);

struct TrainOptions {
  nn::ModelSpec spec = nn::ModelSpec::defaults(nn::ModelKind::kCed);
  nn::TrainConfig train;  // train.seed is overridden by RunOptions::seed
  MaskConfig mask;
  std::filesystem::path model_out;  // default: out_dir/model.mpf
  bool verbose = true;
};

struct TrainSummary {
  nn::TrainResult result;
  std::filesystem::path model_path;
  std::size_t param_count = 0;
  std::size_t train_frames = 0;
  std::size_t val_frames = 0;
};

/// Writes the model file and train_log.csv.
TrainSummary cmd_train(const RunOptions& opts, const TrainOptions& train);

/// Enhances one WAV file as-is (no preprocessing) and writes float32 output.
void cmd_enhance(const std::filesystem::path& model_path, const std::filesystem::path& in_wav,
                 const std::filesystem::path& out_wav);

struct EvalOptions {
  std::string split = "test";
  /// "coded", "oracle:<bound>" (bound may be "inf") or "model:<path>".
  std::vector<std::string> systems{"coded"};
  MaskConfig mask;
};

/// Writes eval.csv (utterance,system,lsd_db,seg_snr_db) with per-system
/// __mean__ rows appended.
MetricReport cmd_eval(const RunOptions& opts, const EvalOptions& eval);

/// Preprocesses every clean file, writes clean/<id>.wav and coded/<id>.wav
/// under out_dir and a manifest.jsonl of file pairs.
Manifest cmd_degrade(const RunOptions& opts, Preset preset);

struct SynthOptions {
  std::size_t train = 14;
  std::size_t val = 3;
  std::size_t test = 3;
  Preset preset = Preset::kLow;
  VoiceStyle style;
  double speaker_spread = 0.25;  // per-utterance voice variation, see speaker_variant
  std::string id_prefix = "utt";
};

/// Generates synthetic clean utterances under out_dir/clean and a
/// manifest.jsonl whose records request surrogate coding.
Manifest cmd_synth(const RunOptions& opts, const SynthOptions& synth);

}  // namespace maskpf
