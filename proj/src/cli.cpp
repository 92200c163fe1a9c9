// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include "maskpf/pipeline.hpp"

namespace maskpf {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return kExitConfig;
    case ErrorKind::kNumeric: return kExitNumeric;
    default: return kExitData;
  }
}

namespace {

void add_mask_options(CLI::App* cmd, MaskConfig& mask, bool modified) {
  cmd->add_option("--gamma", mask.gamma, "Division guard of the ratio mask")->capture_default_str();
  if (modified) {
    cmd->add_option("--alpha", mask.alpha, "Modified-mask threshold")->capture_default_str();
    cmd->add_option("--rho", mask.rho, "Replacement value above alpha")->capture_default_str();
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Mask-based post-filtering of coded speech"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file with option values; sections name subcommands");
  app.set_version_flag("--version", std::string(kToolVersion));

  RunOptions run;
  std::string manifest, out_dir = ".";
  bool no_preprocess = false;
  app.add_option("--manifest", manifest, "JSON-lines manifest of clean/coded pairs");
  app.add_option("--out-dir", out_dir, "Directory for reports and artifacts")->capture_default_str();
  app.add_option("--seed", run.seed, "Seed for degradation, initialization, shuffling and dropout")
      ->capture_default_str();
  app.add_option("--jobs", run.jobs, "Worker threads for per-utterance work")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--max-lag", run.max_lag, "Alignment search range in samples")->capture_default_str();
  app.add_flag("--no-preprocess", no_preprocess, "Skip band limiting and level normalization");

  // stats
  MaskConfig stats_mask;
  auto* stats = app.add_subcommand("stats", "IRM distribution per coded source");
  add_mask_options(stats, stats_mask, false);

  // oracle
  OracleOptions oracle;
  std::vector<std::string> bounds{"1", "2", "4", "10", "inf"};
  bool no_cepstrum = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Oracle bounded-mask and cepstrum-substitution sweep");
  oracle_cmd->add_option("--bounds", bounds, "Mask bounds; 'inf' for unbounded")->capture_default_str();
  oracle_cmd->add_flag("--no-cepstrum", no_cepstrum, "Skip the cepstrum-substitution baseline");
  oracle_cmd->add_option("--cepstrum-keep", oracle.cepstrum_keep, "Substituted quefrencies")->capture_default_str();
  oracle_cmd->add_option("--split", oracle.split, "Restrict to one split");
  add_mask_options(oracle_cmd, oracle.mask, false);

  // train
  TrainOptions train;
  std::string model_kind = "ced", model_out;
  bool unmodified = false, quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a mask estimator");
  train_cmd->add_option("--model", model_kind, "fcnn, lstm or ced")
      ->check(CLI::IsMember({"fcnn", "lstm", "ced"}))
      ->capture_default_str();
  train_cmd->add_option("--model-out", model_out, "Model file (default <out-dir>/model.mpf)");
  train_cmd->add_option("--epochs", train.train.max_epochs, "Epoch cap")->capture_default_str();
  train_cmd->add_option("--lr", train.train.learning_rate, "ADAM learning rate")->capture_default_str();
  train_cmd->add_option("--batch-size", train.train.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--patience", train.train.patience, "Early-stopping patience")->capture_default_str();
  train_cmd->add_option("--min-delta", train.train.min_delta, "Minimum validation improvement")
      ->capture_default_str();
  train_cmd->add_option("--bn-momentum", train.train.bn_momentum, "Batch-norm moving-average momentum")
      ->capture_default_str();
  train_cmd->add_flag("--unmodified-target", unmodified, "Train on the plain IRM instead of the modified mask");
  train_cmd->add_flag("--quiet", quiet, "No per-epoch progress");
  add_mask_options(train_cmd, train.mask, true);

  // enhance
  std::string model_path, in_wav, out_wav;
  auto* enhance = app.add_subcommand("enhance", "Enhance one coded WAV file");
  enhance->add_option("--model", model_path, "Trained model file")->required();
  enhance->add_option("--in", in_wav, "Coded input WAV")->required();
  enhance->add_option("--out", out_wav, "Enhanced output WAV")->required();

  // eval
  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Objective evaluation of systems on a split");
  eval_cmd->add_option("--split", eval.split, "Manifest split")->capture_default_str();
  eval_cmd->add_option("--system", eval.systems, "coded | oracle:<bound> | model:<path>; repeatable")
      ->capture_default_str();
  add_mask_options(eval_cmd, eval.mask, false);

  // degrade
  std::string preset = "q_low";
  auto* degrade = app.add_subcommand("degrade", "Write surrogate-coded WAVs and a pair manifest");
  degrade->add_option("--preset", preset, "q_low, q_mid or q_high")->capture_default_str();

  // synth
  SynthOptions synth;
  std::string synth_preset = "q_low", voice = "default";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic clean corpus and manifest");
  synth_cmd->add_option("--train", synth.train, "Training utterances")->capture_default_str();
  synth_cmd->add_option("--val", synth.val, "Validation utterances")->capture_default_str();
  synth_cmd->add_option("--test", synth.test, "Test utterances")->capture_default_str();
  synth_cmd->add_option("--preset", synth_preset, "Surrogate preset recorded in the manifest")
      ->capture_default_str();
  synth_cmd->add_option("--voice", voice, "default or alternate")
      ->check(CLI::IsMember({"default", "alternate"}))
      ->capture_default_str();
  synth_cmd->add_option("--duration", synth.style.duration_s, "Seconds per utterance")->capture_default_str();
  synth_cmd->add_option("--speaker-spread", synth.speaker_spread, "Per-utterance voice variation, 0 for one voice")
      ->capture_default_str();
  synth_cmd->add_option("--id-prefix", synth.id_prefix, "Utterance id prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  run.manifest = manifest;
  run.out_dir = out_dir;
  run.preprocess = !no_preprocess;
  try {
    if (stats->parsed()) {
      cmd_stats(run, stats_mask);
    } else if (oracle_cmd->parsed()) {
      oracle.bounds.clear();
      for (const auto& b : bounds) {
        if (b == "inf") {
          oracle.bounds.push_back(kUnbounded);
          continue;
        }
        try {
          oracle.bounds.push_back(std::stod(b));
        } catch (const std::exception&) {
          throw Error(ErrorKind::kInvalidConfig, "invalid bound '" + b + "'");
        }
      }
      oracle.include_cepstrum = !no_cepstrum;
      cmd_oracle(run, oracle);
    } else if (train_cmd->parsed()) {
      const auto kind = nn::parse_model_kind(model_kind);
      train.spec = nn::ModelSpec::defaults(kind);
      train.train.modified_target = !unmodified;
      train.model_out = model_out;
      train.verbose = !quiet;
      cmd_train(run, train);
    } else if (enhance->parsed()) {
      cmd_enhance(model_path, in_wav, out_wav);
    } else if (eval_cmd->parsed()) {
      cmd_eval(run, eval);
    } else if (degrade->parsed()) {
      cmd_degrade(run, parse_preset(preset));
    } else if (synth_cmd->parsed()) {
      synth.preset = parse_preset(synth_preset);
      if (voice == "alternate") {
        const double duration = synth.style.duration_s;
        synth.style = alternate_voice_style();
        synth.style.duration_s = duration;
      }
      cmd_synth(run, synth);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace maskpf
