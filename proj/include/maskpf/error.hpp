// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace maskpf {

enum class ErrorKind {
  kInvalidConfig,
  kInvalidInput,
  kTooShort,
  kMissingStats,
  kCannotNormalize,
  kEmptyInput,
  kAlignment,
  kNumeric,
  kIo,
  kCorruptModel,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kTooShort: return "too-short";
    case ErrorKind::kMissingStats: return "missing-stats";
    case ErrorKind::kCannotNormalize: return "cannot-normalize";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kCorruptModel: return "corrupt-model";
  }
  return "unknown";
}

}  // namespace maskpf
