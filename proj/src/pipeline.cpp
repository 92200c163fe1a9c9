// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "maskpf/dsp.hpp"
#include "maskpf/error.hpp"
#include "maskpf/estimator.hpp"
#include "maskpf/nn/model_io.hpp"

namespace maskpf {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::kIo, "cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

ordered_json mask_json(const MaskConfig& m) {
  return {{"gamma", m.gamma}, {"alpha", m.alpha}, {"rho", m.rho}};
}

// Reproducibility header: no timestamps or host data, so reruns match byte for byte.
void write_run_header(const fs::path& dir, std::string_view command, const RunOptions& opts, ordered_json config) {
  ensure_dir(dir);
  ordered_json j;
  j["tool"] = "maskpf";
  j["version"] = std::string(kToolVersion);
  j["command"] = std::string(command);
  j["seed"] = opts.seed;
  j["manifest"] = opts.manifest.string();
  j["preprocess"] = opts.preprocess;
  j["max_lag"] = opts.max_lag;
  j["config"] = std::move(config);
  write_text(dir / fmt::format("run_{}.json", command), j.dump(2) + "\n");
}

template <typename... Args>
void say(const RunOptions& opts, fmt::format_string<Args...> f, Args&&... args) {
  if (!opts.quiet) fmt::print(f, std::forward<Args>(args)...);
}

std::string fmt_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.6f}", v);
}

Manifest load_manifest(const RunOptions& opts) {
  if (opts.manifest.empty()) throw Error(ErrorKind::kInvalidConfig, "--manifest is required");
  Manifest m = Manifest::load(opts.manifest);
  if (m.records.empty()) throw Error(ErrorKind::kEmptyInput, "manifest has no records");
  return m;
}

AudioBuffer crop(AudioBuffer buf, std::size_t len) {
  buf.samples.resize(len);
  return buf;
}

double parse_bound(std::string_view text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return kUnbounded;
  try {
    std::size_t used = 0;
    const double b = std::stod(std::string(text), &used);
    if (used != text.size() || !(b > 0.0)) throw std::invalid_argument("bound");
    return b;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidConfig, "invalid mask bound '" + std::string(text) + "'");
  }
}

}  // namespace

std::uint64_t record_seed(std::uint64_t run_seed, std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(run_seed, h);
}

UtterancePair load_record(const Manifest& manifest, const ManifestRecord& record, const RunOptions& opts) {
  UtterancePair p;
  p.id = record.id;
  p.split = record.split;
  AudioBuffer clean = read_wav(manifest.resolve(record.clean), SignalRole::kClean);
  if (record.is_surrogate()) {
    p.source = std::string(to_string(*record.preset));
    if (opts.preprocess) clean = level_normalize(band_limit(clean)).buffer;
    AudioBuffer coded = surrogate_code(clean, DegradeProfile{*record.preset, record_seed(opts.seed, record.id)});
    if (opts.preprocess) coded = band_limit(coded);
    coded.role = SignalRole::kCoded;
    p.clean = std::move(clean);
    p.coded = std::move(coded);
    return p;
  }
  p.source = record.preset ? std::string(to_string(*record.preset)) : "file";
  AlignedPair a = align_pair(clean, read_wav(manifest.resolve(record.coded), SignalRole::kCoded), opts.max_lag);
  if (!a.aligned) {
    fmt::print(stderr, "warning: alignment failed for '{}' (peak correlation {:.3f}); pair left unshifted\n",
               record.id, a.peak_correlation);
  }
  if (opts.preprocess) {
    a.clean = band_limit(a.clean);
    a.coded = band_limit(a.coded);
    const double scale = level_normalize(a.clean).scale;
    for (double& s : a.clean.samples) s *= scale;
    for (double& s : a.coded.samples) s *= scale;
  }
  a.clean.role = SignalRole::kClean;
  a.coded.role = SignalRole::kCoded;
  p.clean = std::move(a.clean);
  p.coded = std::move(a.coded);
  return p;
}

std::vector<UtterancePair> load_split(const Manifest& manifest, std::string_view split, const RunOptions& opts) {
  const auto records = manifest.split(split);
  return parallel_map<UtterancePair>(records.size(), opts.jobs,
                                     [&](std::size_t i) { return load_record(manifest, records[i], opts); });
}

// ---------------------------------------------------------------- stats

StatsResult cmd_stats(const RunOptions& opts, const MaskConfig& mask) {
  mask.validate();
  const Manifest manifest = load_manifest(opts);
  write_run_header(opts.out_dir, "stats", opts, {{"mask", mask_json(mask)}});

  struct Item {
    std::string source;
    MaskHistogram hist;
  };
  const auto items = parallel_map<Item>(manifest.records.size(), opts.jobs, [&](std::size_t i) {
    const UtterancePair p = load_record(manifest, manifest.records[i], opts);
    const Matrix clean_mag = magnitudes(stft(p.clean));
    const Matrix coded_mag = magnitudes(stft(p.coded));
    return Item{p.source, mask_histogram(compute_irm(clean_mag, coded_mag, mask.gamma))};
  });

  StatsResult result;
  std::map<std::string, std::size_t> index;
  for (const auto& item : items) {
    auto [it, inserted] = index.emplace(item.source, result.sources.size());
    if (inserted) result.sources.emplace_back(item.source, MaskHistogram{});
    result.sources[it->second].second.merge(item.hist);
  }

  std::string csv = "source,bucket,count,fraction\n";
  say(opts, "{:<10} {:>10} {:>10} {:>10} {:>10}\n", "source", MaskHistogram::bucket_label(0),
             MaskHistogram::bucket_label(1), MaskHistogram::bucket_label(2), MaskHistogram::bucket_label(3));
  for (const auto& [source, hist] : result.sources) {
    const auto f = hist.fractions();
    for (std::size_t b = 0; b < 4; ++b) {
      csv += fmt::format("{},{},{},{:.12f}\n", source, MaskHistogram::bucket_label(b), hist.counts[b], f[b]);
    }
    say(opts, "{:<10} {:>9.2f}% {:>9.2f}% {:>9.2f}% {:>9.2f}%\n", source, 100 * f[0], 100 * f[1], 100 * f[2],
               100 * f[3]);
  }
  write_text(opts.out_dir / "stats.csv", csv);
  return result;
}

// ---------------------------------------------------------------- oracle

OracleResult cmd_oracle(const RunOptions& opts, const OracleOptions& oracle) {
  oracle.mask.validate();
  for (double b : oracle.bounds) {
    if (!(b > 0.0)) throw Error(ErrorKind::kInvalidConfig, "bounds must be positive");
  }
  const Manifest manifest = load_manifest(opts);
  const auto records = manifest.split(oracle.split);
  if (records.empty()) throw Error(ErrorKind::kEmptyInput, "no records in split '" + oracle.split + "'");
  ordered_json bounds = ordered_json::array();
  for (double b : oracle.bounds) bounds.push_back(format_bound(b));
  write_run_header(opts.out_dir, "oracle", opts,
                   {{"bounds", bounds},
                    {"include_cepstrum", oracle.include_cepstrum},
                    {"cepstrum_keep", oracle.cepstrum_keep},
                    {"split", oracle.split},
                    {"mask", mask_json(oracle.mask)}});

  const OracleSweepOptions sweep{oracle.mask, oracle.include_cepstrum, oracle.cepstrum_keep};
  OracleResult result;
  result.rows = parallel_map<std::vector<OracleRow>>(records.size(), opts.jobs, [&](std::size_t i) {
    const UtterancePair p = load_record(manifest, records[i], opts);
    return oracle_sweep(p.clean, p.coded, oracle.bounds, sweep);
  });
  for (const auto& r : records) result.utterances.push_back(r.id);

  result.means = result.rows.front();
  for (auto& m : result.means) m.lsd_spec_db = m.lsd_resynth_db = m.seg_snr_db = 0.0;
  for (const auto& rows : result.rows) {
    for (std::size_t s = 0; s < rows.size(); ++s) {
      result.means[s].lsd_spec_db += rows[s].lsd_spec_db;
      result.means[s].lsd_resynth_db += rows[s].lsd_resynth_db;
      result.means[s].seg_snr_db += rows[s].seg_snr_db;
    }
  }
  const double n = static_cast<double>(result.rows.size());
  for (auto& m : result.means) {
    m.lsd_spec_db /= n;
    m.lsd_resynth_db /= n;
    m.seg_snr_db /= n;
  }

  std::string csv = "utterance,system,bound,lsd_spec_db,lsd_resynth_db,seg_snr_db\n";
  auto emit = [&](const std::string& utt, const OracleRow& r) {
    csv += fmt::format("{},{},{},{},{},{}\n", utt, r.system, r.bound > 0 ? format_bound(r.bound) : "",
                       fmt_num(r.lsd_spec_db), fmt_num(r.lsd_resynth_db), fmt_num(r.seg_snr_db));
  };
  for (std::size_t u = 0; u < result.rows.size(); ++u) {
    for (const auto& r : result.rows[u]) emit(result.utterances[u], r);
  }
  say(opts, "{:<12} {:>12} {:>14} {:>12}\n", "system", "LSD spec dB", "LSD resynth dB", "segSNR dB");
  for (const auto& m : result.means) {
    emit("__mean__", m);
    say(opts, "{:<12} {:>12.4f} {:>14.4f} {:>12.3f}\n", m.system, m.lsd_spec_db, m.lsd_resynth_db, m.seg_snr_db);
  }
  write_text(opts.out_dir / "oracle.csv", csv);
  return result;
}

// ---------------------------------------------------------------- train

namespace {

struct Prepared {
  Matrix features;  // raw log-magnitudes
  Matrix target;
  Matrix coded_mag;
};

Prepared prepare(const UtterancePair& p, const MaskConfig& mask, bool modified) {
  const Spectrogram coded_spec = stft(p.coded);
  const Matrix clean_mag = magnitudes(stft(p.clean));
  Prepared out;
  out.coded_mag = magnitudes(coded_spec);
  out.features = log_magnitude(coded_spec).values;
  const MaskMatrix irm = compute_irm(clean_mag, out.coded_mag, mask.gamma);
  out.target = modified ? modified_mask(irm, mask).values : irm.values;
  return out;
}

nn::TrainingSet build_set(std::vector<Prepared>& items, const NormStats& stats) {
  nn::TrainingSet set;
  for (auto& item : items) {
    FeatureMatrix f = normalize(FeatureMatrix{std::move(item.features), std::nullopt}, stats);
    set.add(std::move(f.values), std::move(item.target), std::move(item.coded_mag));
  }
  return set;
}

ordered_json train_json(const nn::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},   {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"adam_eps", c.adam_eps},       {"patience", c.patience},
          {"min_delta", c.min_delta},         {"max_epochs", c.max_epochs},   {"bn_momentum", c.bn_momentum},
          {"modified_target", c.modified_target}};
}

}  // namespace

TrainSummary cmd_train(const RunOptions& opts, const TrainOptions& train) {
  train.mask.validate();
  nn::TrainConfig cfg = train.train;
  cfg.seed = opts.seed;
  cfg.validate();
  train.spec.validate();
  const Manifest manifest = load_manifest(opts);
  if (manifest.split("train").empty()) throw Error(ErrorKind::kEmptyInput, "manifest has no train split");
  if (manifest.split("val").empty()) throw Error(ErrorKind::kEmptyInput, "manifest has no val split");

  TrainSummary summary;
  summary.model_path = train.model_out.empty() ? opts.out_dir / "model.mpf" : train.model_out;
  write_run_header(opts.out_dir, "train", opts,
                   {{"model", std::string(nn::to_string(train.spec.kind))},
                    {"context_frames", train.spec.context_frames},
                    {"train", train_json(cfg)},
                    {"mask", mask_json(train.mask)},
                    {"model_out", summary.model_path.filename().string()}});

  auto prepare_split = [&](std::string_view split) {
    const auto pairs = load_split(manifest, split, opts);
    return parallel_map<Prepared>(pairs.size(), opts.jobs, [&](std::size_t i) {
      return prepare(pairs[i], train.mask, cfg.modified_target);
    });
  };
  auto train_items = prepare_split("train");
  auto val_items = prepare_split("val");

  std::vector<Matrix> feats;
  for (const auto& item : train_items) feats.push_back(item.features);
  const NormStats stats = compute_norm_stats(feats);
  feats.clear();
  const nn::TrainingSet train_set = build_set(train_items, stats);
  const nn::TrainingSet val_set = build_set(val_items, stats);
  summary.train_frames = train_set.size();
  summary.val_frames = val_set.size();

  auto net = nn::MaskNet::build(train.spec, cfg.seed);
  summary.param_count = nn::param_count(net->params());
  if (train.verbose) {
    fmt::print("model {} with {} parameters; {} training frames, {} validation frames\n",
               nn::to_string(train.spec.kind), summary.param_count, summary.train_frames, summary.val_frames);
  }
  summary.result = nn::train(*net, cfg, train_set, val_set, [&](const nn::EpochLog& e) {
    if (train.verbose) {
      fmt::print("epoch {:>3}  train {:.6f}  val {:.6f}  ({:.1f} s)\n", e.epoch, e.train_loss, e.val_loss,
                 e.elapsed_s);
      std::fflush(stdout);
    }
  });
  if (train.verbose) {
    fmt::print("best epoch {} with validation loss {:.6f}\n", summary.result.best_epoch,
               summary.result.best_val_loss);
  }
  ensure_dir(summary.model_path.has_parent_path() ? summary.model_path.parent_path() : fs::path("."));
  nn::save_model(summary.model_path, *net, stats, cfg, train.mask, cfg.seed);
  nn::write_training_log(opts.out_dir / "train_log.csv", summary.result.log);
  return summary;
}

// ---------------------------------------------------------------- enhance

void cmd_enhance(const fs::path& model_path, const fs::path& in_wav, const fs::path& out_wav) {
  MaskEstimator est = MaskEstimator::load(model_path);
  const AudioBuffer coded = read_wav(in_wav, SignalRole::kCoded);
  const AudioBuffer enhanced = est.enhance(coded);
  const fs::path dir = out_wav.has_parent_path() ? out_wav.parent_path() : fs::path(".");
  RunOptions header_opts;
  write_run_header(dir, "enhance", header_opts,
                   {{"model", model_path.filename().string()},
                    {"input", in_wav.filename().string()},
                    {"output", out_wav.filename().string()}});
  write_wav(out_wav, enhanced, WavFormat::kFloat32);
}

// ---------------------------------------------------------------- eval

MetricReport cmd_eval(const RunOptions& opts, const EvalOptions& eval) {
  eval.mask.validate();
  if (eval.systems.empty()) throw Error(ErrorKind::kInvalidConfig, "no systems to evaluate");

  struct System {
    std::string label;
    enum { kCoded, kOracle, kModel } kind;
    double bound = kUnbounded;
    std::string model_bytes;
  };
  std::vector<System> systems;
  for (const auto& s : eval.systems) {
    if (s == "coded") {
      systems.push_back({"coded", System::kCoded, kUnbounded, {}});
    } else if (s.starts_with("oracle:")) {
      const double b = parse_bound(std::string_view(s).substr(7));
      systems.push_back({"oracle:" + format_bound(b), System::kOracle, b, {}});
    } else if (s.starts_with("model:")) {
      const fs::path path = s.substr(6);
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorKind::kIo, "cannot open model " + path.string());
      System sys{"model:" + path.filename().string(), System::kModel, kUnbounded, {}};
      sys.model_bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      nn::parse_model(sys.model_bytes);  // fail early on a corrupt file
      systems.push_back(std::move(sys));
    } else {
      throw Error(ErrorKind::kInvalidConfig, "unknown system '" + s + "'");
    }
  }

  const Manifest manifest = load_manifest(opts);
  const auto records = manifest.split(eval.split);
  if (records.empty()) throw Error(ErrorKind::kEmptyInput, "no records in split '" + eval.split + "'");
  ordered_json labels = ordered_json::array();
  for (const auto& s : systems) labels.push_back(s.label);
  write_run_header(opts.out_dir, "eval", opts,
                   {{"split", eval.split}, {"systems", labels}, {"mask", mask_json(eval.mask)}});

  const auto per_utt = parallel_map<std::vector<UtteranceMetrics>>(records.size(), opts.jobs, [&](std::size_t i) {
    const UtterancePair p = load_record(manifest, records[i], opts);
    const Spectrogram coded_spec = stft(p.coded);
    const std::size_t len = (coded_spec.frames - 1) * coded_spec.config.hop + coded_spec.config.frame_len;
    const AudioBuffer clean = crop(p.clean, len);
    std::vector<UtteranceMetrics> out;
    for (const auto& sys : systems) {
      AudioBuffer enhanced;
      switch (sys.kind) {
        case System::kCoded: enhanced = crop(p.coded, len); break;
        case System::kOracle: {
          const MaskMatrix irm =
              compute_irm(magnitudes(stft(p.clean)), magnitudes(coded_spec), eval.mask.gamma);
          enhanced = istft(apply_mask(bound_mask(irm, sys.bound), coded_spec));
          break;
        }
        case System::kModel: {
          MaskEstimator est(nn::parse_model(sys.model_bytes));
          enhanced = istft(est.enhance(coded_spec));
          break;
        }
      }
      out.push_back({p.id, sys.label, log_spectral_distance(clean, enhanced), segmental_snr(clean, enhanced)});
    }
    return out;
  });

  MetricReport report;
  for (const auto& rows : per_utt) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  std::string csv = "utterance,system,lsd_db,seg_snr_db\n";
  for (const auto& r : report.rows) {
    csv += fmt::format("{},{},{},{}\n", r.utterance, r.system, fmt_num(r.lsd_db), fmt_num(r.seg_snr_db));
  }
  say(opts, "{:<28} {:>10} {:>10}\n", "system", "LSD dB", "segSNR dB");
  for (const auto& m : report.system_means()) {
    csv += fmt::format("{},{},{},{}\n", m.utterance, m.system, fmt_num(m.lsd_db), fmt_num(m.seg_snr_db));
    say(opts, "{:<28} {:>10.4f} {:>10.3f}\n", m.system, m.lsd_db, m.seg_snr_db);
  }
  write_text(opts.out_dir / "eval.csv", csv);
  return report;
}

// ---------------------------------------------------------------- degrade / synth

Manifest cmd_degrade(const RunOptions& opts, Preset preset) {
  const Manifest input = load_manifest(opts);
  ensure_dir(opts.out_dir / "clean");
  ensure_dir(opts.out_dir / "coded");
  write_run_header(opts.out_dir, "degrade", opts, {{"preset", std::string(to_string(preset))}});

  Manifest out;
  out.base_dir = opts.out_dir;
  const auto records = parallel_map<ManifestRecord>(input.records.size(), opts.jobs, [&](std::size_t i) {
    const ManifestRecord& r = input.records[i];
    AudioBuffer clean = read_wav(input.resolve(r.clean), SignalRole::kClean);
    if (opts.preprocess) clean = level_normalize(band_limit(clean)).buffer;
    AudioBuffer coded = surrogate_code(clean, DegradeProfile{preset, record_seed(opts.seed, r.id)});
    if (opts.preprocess) coded = band_limit(coded);
    const std::string clean_rel = "clean/" + r.id + ".wav";
    const std::string coded_rel = "coded/" + r.id + ".wav";
    write_wav(opts.out_dir / clean_rel, clean, WavFormat::kFloat32);
    write_wav(opts.out_dir / coded_rel, coded, WavFormat::kFloat32);
    return ManifestRecord{r.id, clean_rel, coded_rel, r.split, preset};
  });
  out.records = records;
  out.save(opts.out_dir / "manifest.jsonl");
  say(opts, "wrote {} coded files to {}\n", out.records.size(), (opts.out_dir / "coded").string());
  return out;
}

Manifest cmd_synth(const RunOptions& opts, const SynthOptions& synth) {
  const std::size_t total = synth.train + synth.val + synth.test;
  if (total == 0) throw Error(ErrorKind::kInvalidConfig, "nothing to synthesize");
  if (!(synth.speaker_spread >= 0.0 && synth.speaker_spread <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "speaker spread must be in [0, 1]");
  }
  ensure_dir(opts.out_dir / "clean");
  write_run_header(opts.out_dir, "synth", opts,
                   {{"train", synth.train},
                    {"val", synth.val},
                    {"test", synth.test},
                    {"preset", std::string(to_string(synth.preset))},
                    {"f0_min_hz", synth.style.f0_min_hz},
                    {"f0_max_hz", synth.style.f0_max_hz},
                    {"formant_scale", synth.style.formant_scale},
                    {"duration_s", synth.style.duration_s},
                    {"noise_floor_db", synth.style.noise_floor_db},
                    {"speaker_spread", synth.speaker_spread},
                    {"id_prefix", synth.id_prefix}});

  Manifest out;
  out.base_dir = opts.out_dir;
  out.records = parallel_map<ManifestRecord>(total, opts.jobs, [&](std::size_t i) {
    const std::string id = fmt::format("{}{:03}", synth.id_prefix, i);
    const std::uint64_t seed = mix_seed(opts.seed, i);
    const AudioBuffer clean = synthesize_utterance(seed, speaker_variant(synth.style, seed, synth.speaker_spread));
    const std::string rel = "clean/" + id + ".wav";
    write_wav(opts.out_dir / rel, clean, WavFormat::kFloat32);
    const char* split = i < synth.train ? "train" : (i < synth.train + synth.val ? "val" : "test");
    return ManifestRecord{id, rel, std::string(kSurrogatePrefix) + std::string(to_string(synth.preset)), split,
                          synth.preset};
  });
  out.save(opts.out_dir / "manifest.jsonl");
  return out;
}

}  // namespace maskpf
