// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "maskpf/error.hpp"

namespace maskpf::nn {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'P', 'F', '1'};
constexpr int kFormatVersion = 1;

json spec_to_json(const ModelSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"context_frames", s.context_frames},
          {"input_bins", s.input_bins},
          {"output_bins", s.output_bins},
          {"fcnn_hidden", s.fcnn_hidden},
          {"fcnn_dropout", s.fcnn_dropout},
          {"lstm_units1", s.lstm_units1},
          {"lstm_units2", s.lstm_units2},
          {"lstm_dropout", s.lstm_dropout},
          {"lstm_recurrent_dropout", s.lstm_recurrent_dropout},
          {"ced_channels", s.ced_channels}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.context_frames = j.at("context_frames");
  s.input_bins = j.at("input_bins");
  s.output_bins = j.at("output_bins");
  s.fcnn_hidden = j.at("fcnn_hidden");
  s.fcnn_dropout = j.at("fcnn_dropout");
  s.lstm_units1 = j.at("lstm_units1");
  s.lstm_units2 = j.at("lstm_units2");
  s.lstm_dropout = j.at("lstm_dropout");
  s.lstm_recurrent_dropout = j.at("lstm_recurrent_dropout");
  s.ced_channels = j.at("ced_channels");
  return s;
}

json train_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},           {"patience", c.patience},
          {"min_delta", c.min_delta},         {"max_epochs", c.max_epochs},
          {"seed", c.seed},                   {"bn_momentum", c.bn_momentum},
          {"modified_target", c.modified_target}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate");
  c.batch_size = j.at("batch_size");
  c.beta1 = j.at("beta1");
  c.beta2 = j.at("beta2");
  c.adam_eps = j.at("adam_eps");
  c.patience = j.at("patience");
  c.min_delta = j.at("min_delta");
  c.max_epochs = j.at("max_epochs");
  c.seed = j.at("seed");
  c.bn_momentum = j.at("bn_momentum");
  c.modified_target = j.at("modified_target");
  return c;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string serialize_model(const MaskNet& net, const NormStats& stats, const TrainConfig& train,
                            const MaskConfig& mask, std::uint64_t seed) {
  const ParamStore& params = net.params();
  json tensors = json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({{"name", params[i].name}, {"shape", params[i].value.shape()}});
  }
  const json meta = {{"format_version", kFormatVersion},
                     {"spec", spec_to_json(net.spec())},
                     {"seed", seed},
                     {"tensors", tensors},
                     {"norm", {{"mean", stats.mean}, {"stddev", stats.stddev}}},
                     {"train", train_to_json(train)},
                     {"mask", {{"gamma", mask.gamma}, {"alpha", mask.alpha}, {"rho", mask.rho}}}};
  const std::string text = meta.dump();

  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double v : params[i].value.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

void save_model(const std::filesystem::path& path, const MaskNet& net, const NormStats& stats,
                const TrainConfig& train, const MaskConfig& mask, std::uint64_t seed) {
  const std::string bytes = serialize_model(net, stats, train, mask, seed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

ModelFile parse_model(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kCorruptModel, "bad magic");
  }
  const std::size_t meta_len = get_u32(bytes, 4);
  if (bytes.size() < 8 + meta_len) throw Error(ErrorKind::kCorruptModel, "truncated metadata");

  ModelFile mf;
  std::size_t pos = 8 + meta_len;
  try {
    const json meta = json::parse(bytes.substr(8, meta_len));
    if (meta.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::kCorruptModel, "unsupported format version");
    }
    const ModelSpec spec = spec_from_json(meta.at("spec"));
    mf.seed = meta.at("seed");
    mf.net = MaskNet::build(spec, mf.seed);
    mf.stats.mean = meta.at("norm").at("mean").get<std::vector<double>>();
    mf.stats.stddev = meta.at("norm").at("stddev").get<std::vector<double>>();
    mf.train = train_from_json(meta.at("train"));
    mf.mask.gamma = meta.at("mask").at("gamma");
    mf.mask.alpha = meta.at("mask").at("alpha");
    mf.mask.rho = meta.at("mask").at("rho");

    const json& tensors = meta.at("tensors");
    ParamStore& params = mf.net->params();
    if (tensors.size() != params.size()) throw Error(ErrorKind::kCorruptModel, "tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      Param& p = params[i];
      if (tensors[i].at("name").get<std::string>() != p.name ||
          tensors[i].at("shape").get<std::vector<std::size_t>>() != p.value.shape()) {
        throw Error(ErrorKind::kCorruptModel, "tensor mismatch at " + p.name);
      }
      if (bytes.size() < pos + 4 * p.value.size()) throw Error(ErrorKind::kCorruptModel, "truncated payload");
      for (std::size_t j = 0; j < p.value.size(); ++j, pos += 4) {
        const float f = std::bit_cast<float>(get_u32(bytes, pos));
        if (!std::isfinite(f)) throw Error(ErrorKind::kCorruptModel, "non-finite value in " + p.name);
        p.value[j] = f;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kCorruptModel, std::string("metadata: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kCorruptModel) throw;
    throw Error(ErrorKind::kCorruptModel, e.what());
  }
  if (pos != bytes.size()) throw Error(ErrorKind::kCorruptModel, "trailing bytes after payload");
  const std::size_t bins = mf.net->spec().input_bins;
  if (mf.stats.mean.size() != bins || mf.stats.stddev.size() != bins) {
    throw Error(ErrorKind::kCorruptModel, "normalization stats do not match the input width");
  }
  return mf;
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model(bytes);
}

}  // namespace maskpf::nn
