// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "maskpf/error.hpp"

namespace maskpf {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

std::string_view to_string(SignalRole role) {
  switch (role) {
    case SignalRole::kClean: return "clean";
    case SignalRole::kCoded: return "coded";
    case SignalRole::kEnhanced: return "enhanced";
  }
  return "unknown";
}

void validate(const AudioBuffer& buf) {
  if (buf.sample_rate != kSampleRate) {
    throw Error(ErrorKind::kInvalidInput,
                "sample rate " + std::to_string(buf.sample_rate) + " Hz, expected 16000 Hz");
  }
  for (double s : buf.samples) {
    if (!std::isfinite(s)) throw Error(ErrorKind::kInvalidInput, "non-finite sample");
  }
}

AudioBuffer read_wav(const std::filesystem::path& path, SignalRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kIo, path.string() + " is not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw Error(ErrorKind::kIo, path.string() + ": truncated fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) format = le16(chunk + 8 + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1U);
  }
  if (!have_fmt || data == nullptr) throw Error(ErrorKind::kIo, path.string() + ": missing fmt or data chunk");
  if (channels != 1) throw Error(ErrorKind::kInvalidInput, path.string() + ": expected mono");
  if (rate != static_cast<std::uint32_t>(kSampleRate)) {
    throw Error(ErrorKind::kInvalidInput, path.string() + ": expected 16000 Hz, got " + std::to_string(rate));
  }

  AudioBuffer buf;
  buf.role = role;
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_size / 2;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      buf.samples[i] = static_cast<std::int16_t>(le16(data + 2 * i)) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      buf.samples[i] = std::bit_cast<float>(le32(data + 4 * i));
    }
  } else {
    throw Error(ErrorKind::kInvalidInput,
                path.string() + ": unsupported sample format (need PCM16 or float32)");
  }
  validate(buf);
  return buf;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf, WavFormat format) {
  validate(buf);
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(buf.size() * block);

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, tag);
  put16(out, 1);
  put32(out, kSampleRate);
  put32(out, kSampleRate * block);
  put16(out, static_cast<std::uint16_t>(block));
  put16(out, bits);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (double s : buf.samples) {
    if (format == WavFormat::kPcm16) {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put16(out, static_cast<std::uint16_t>(q));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace maskpf
