// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskpf/degrade.hpp"

namespace maskpf {

inline constexpr std::string_view kSurrogatePrefix = "surrogate:";

/// One clean/coded pair. `coded` is either a WAV path or "surrogate:<preset>".
/// Relative paths resolve against the manifest's directory.
struct ManifestRecord {
  std::string id;
  std::string clean;
  std::string coded;
  std::string split;  // train | val | test
  std::optional<Preset> preset;

  bool is_surrogate() const { return coded.starts_with(kSurrogatePrefix); }
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  /// JSON lines with keys clean, coded, split and optionally id and preset.
  /// A missing id defaults to the clean file's stem. Ids must be unique.
  static Manifest load(const std::filesystem::path& path);
  static Manifest parse(const std::string& text, const std::filesystem::path& base_dir);

  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  std::filesystem::path resolve(const std::string& p) const;
  /// Records of one split in manifest order; an empty name selects all.
  std::vector<ManifestRecord> split(std::string_view name) const;
};

bool is_valid_split(std::string_view split);

}  // namespace maskpf
