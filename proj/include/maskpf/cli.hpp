// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "maskpf/error.hpp"

namespace maskpf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind);

/// Entry point of the maskpf tool; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace maskpf
