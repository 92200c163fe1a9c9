// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <iterator>

#include "helpers.hpp"
#include "maskpf/audio.hpp"
#include "maskpf/estimator.hpp"
#include "maskpf/manifest.hpp"
#include "maskpf/nn/model_io.hpp"

using namespace maskpf;
using test::kind_of;
namespace fs = std::filesystem;

namespace {

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-built PCM16 WAV with arbitrary layout.
void write_raw_pcm16(const fs::path& path, std::uint16_t channels, std::uint32_t rate,
                     const std::vector<std::int16_t>& samples) {
  std::string d;
  for (auto s : samples) put16(d, static_cast<std::uint16_t>(s));
  std::string w = "RIFF";
  put32(w, static_cast<std::uint32_t>(36 + d.size()));
  w += "WAVEfmt ";
  put32(w, 16);
  put16(w, 1);
  put16(w, channels);
  put32(w, rate);
  put32(w, rate * channels * 2);
  put16(w, static_cast<std::uint16_t>(channels * 2));
  put16(w, 16);
  w += "data";
  put32(w, static_cast<std::uint32_t>(d.size()));
  w += d;
  std::ofstream(path, std::ios::binary) << w;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nn::ModelSpec small_fcnn() {
  nn::ModelSpec s = nn::ModelSpec::defaults(nn::ModelKind::kFcnn);
  s.fcnn_hidden = 8;
  return s;
}

NormStats flat_stats() { return NormStats{std::vector<double>(205, -3.0), std::vector<double>(205, 2.0)}; }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("wav round trips") {
    const auto dir = test::scratch_dir("wav");
    auto x = test::noise(1000, 1, 0.2);
    write_wav(dir / "f.wav", x, WavFormat::kFloat32);
    const auto y = read_wav(dir / "f.wav");
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.samples[i] == static_cast<float>(x.samples[i]));

    write_wav(dir / "p.wav", x, WavFormat::kPcm16);
    const auto z = read_wav(dir / "p.wav");
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(z.samples[i] - x.samples[i]) <= 1.0 / 32768.0);

    write_raw_pcm16(dir / "raw.wav", 1, 16000, {0, 16384, -32768, 32767});
    const auto r = read_wav(dir / "raw.wav");
    CHECK(r.samples == std::vector<double>{0.0, 0.5, -1.0, 32767.0 / 32768.0});
  }

  TEST_CASE("wav rejects unsupported layouts") {
    const auto dir = test::scratch_dir("wavbad");
    write_raw_pcm16(dir / "stereo.wav", 2, 16000, {0, 0, 1, 1});
    CHECK(kind_of([&] { read_wav(dir / "stereo.wav"); }) == ErrorKind::kInvalidInput);
    write_raw_pcm16(dir / "cd.wav", 1, 44100, {0, 1});
    CHECK(kind_of([&] { read_wav(dir / "cd.wav"); }) == ErrorKind::kInvalidInput);
    std::ofstream(dir / "junk.wav") << "not a wav";
    CHECK(kind_of([&] { read_wav(dir / "junk.wav"); }) == ErrorKind::kIo);
    CHECK(kind_of([&] { read_wav(dir / "missing.wav"); }) == ErrorKind::kIo);
  }

  TEST_CASE("model files round trip") {
    const auto dir = test::scratch_dir("model");
    auto net = nn::MaskNet::build(small_fcnn(), 3);
    nn::TrainConfig cfg;
    cfg.seed = 3;
    MaskConfig mask;
    nn::save_model(dir / "m.mpf", *net, flat_stats(), cfg, mask, 3);
    const std::string bytes = read_bytes(dir / "m.mpf");
    CHECK(bytes.substr(0, 4) == "MPF1");
    CHECK(bytes == nn::serialize_model(*net, flat_stats(), cfg, mask, 3));

    auto loaded = nn::load_model(dir / "m.mpf");
    CHECK(loaded.net->spec() == net->spec());
    CHECK(loaded.stats.mean == flat_stats().mean);
    CHECK(loaded.train.seed == 3);
    for (std::size_t i = 0; i < net->params().size(); ++i) {
      const auto& a = net->params()[i].value;
      const auto& b = loaded.net->params()[i].value;
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(b[j] == static_cast<float>(a[j]));
    }
    // Saving the loaded model reproduces the file exactly.
    CHECK(nn::serialize_model(*loaded.net, loaded.stats, loaded.train, loaded.mask, loaded.seed) == bytes);
  }

  TEST_CASE("corrupt model files are rejected") {
    auto net = nn::MaskNet::build(small_fcnn(), 3);
    const std::string good = nn::serialize_model(*net, flat_stats(), {}, {}, 3);
    auto kind = [](const std::string& b) { return kind_of([&] { nn::parse_model(b); }); };
    CHECK(kind("XPF1" + good.substr(4)) == ErrorKind::kCorruptModel);
    CHECK(kind(good.substr(0, good.size() - 3)) == ErrorKind::kCorruptModel);
    CHECK(kind(good + "x") == ErrorKind::kCorruptModel);
    CHECK(kind(good.substr(0, 6)) == ErrorKind::kCorruptModel);
    std::string renamed = good;
    renamed.replace(renamed.find("fcnn.dense1.weight"), 5, "fcnX");
    CHECK(kind(renamed) == ErrorKind::kCorruptModel);
    std::string bad_json = good;
    bad_json[10] = '#';
    CHECK(kind(bad_json) == ErrorKind::kCorruptModel);
  }

  TEST_CASE("estimator enhances silence to silence") {
    auto net = nn::MaskNet::build(small_fcnn(), 4);
    MaskEstimator est(nn::parse_model(nn::serialize_model(*net, flat_stats(), {}, {}, 4)));
    AudioBuffer silence;
    silence.samples.assign(4000, 0.0);
    const auto y = est.enhance(silence);
    CHECK(y.size() == (stft(silence).frames - 1) * 256 + 512);
    for (double v : y.samples) CHECK(v == 0.0);
  }

  TEST_CASE("estimator leaves the passthrough band untouched") {
    auto net = nn::MaskNet::build(small_fcnn(), 4);
    MaskEstimator est(nn::parse_model(nn::serialize_model(*net, flat_stats(), {}, {}, 4)));
    const auto x = test::noise(8000, 3);
    const Spectrogram coded = stft(x);
    const Spectrogram enhanced = est.enhance(coded);
    for (std::size_t t = 0; t < coded.frames; ++t) {
      for (std::size_t k = 205; k < 257; ++k) CHECK(enhanced.at(t, k) == coded.at(t, k));
    }
  }

  TEST_CASE("manifest parsing") {
    const auto dir = test::scratch_dir("manifest");
    std::ofstream(dir / "m.jsonl") << R"({"clean":"a.wav","coded":"surrogate:q_mid","split":"train"})" << "\n\n"
                                   << R"({"id":"b","clean":"/abs/b.wav","coded":"c/b.wav","split":"test","preset":"q_high"})"
                                   << "\n";
    const auto m = Manifest::load(dir / "m.jsonl");
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].id == "a");
    CHECK(m.records[0].is_surrogate());
    CHECK(*m.records[0].preset == Preset::kMid);
    CHECK(m.resolve(m.records[0].clean) == fs::absolute(dir) / "a.wav");
    CHECK(m.resolve(m.records[1].clean) == fs::path("/abs/b.wav"));
    CHECK(*m.records[1].preset == Preset::kHigh);
    CHECK(m.split("test").size() == 1);
    CHECK(m.split("").size() == 2);
    CHECK(Manifest::parse(m.serialize(), dir).serialize() == m.serialize());

    auto kind = [&](const std::string& text) { return kind_of([&] { Manifest::parse(text, dir); }); };
    CHECK(kind(R"({"clean":"a.wav","coded":"x.wav","split":"dev"})") == ErrorKind::kInvalidInput);
    CHECK(kind(R"({"clean":"a.wav","split":"train"})") == ErrorKind::kInvalidInput);
    CHECK(kind(R"({"clean":"a.wav","coded":"surrogate:q_zz","split":"train"})") == ErrorKind::kInvalidInput);
    CHECK(kind("{\"clean\":\"a.wav\",\"coded\":\"x.wav\",\"split\":\"train\"}\n"
               "{\"clean\":\"a.wav\",\"coded\":\"y.wav\",\"split\":\"val\"}") == ErrorKind::kInvalidInput);
    CHECK(kind_of([&] { Manifest::load(dir / "none.jsonl"); }) == ErrorKind::kIo);
  }

  TEST_CASE("load_pair aligns delayed files") {
    const auto dir = test::scratch_dir("pair");
    const auto clean = test::noise(8000, 5, 0.2);
    AudioBuffer coded;
    coded.samples.assign(37, 0.0);
    coded.samples.insert(coded.samples.end(), clean.samples.begin(), clean.samples.end());
    write_wav(dir / "clean.wav", clean);
    write_wav(dir / "coded.wav", coded);
    const auto p = load_pair(dir / "clean.wav", dir / "coded.wav");
    CHECK(p.lag == 37);
    CHECK(p.aligned);
    CHECK(p.clean.size() == p.coded.size());
    const auto same = load_pair(dir / "clean.wav", dir / "clean.wav");
    CHECK(same.lag == 0);
  }
}
