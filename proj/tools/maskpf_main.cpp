// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/cli.hpp"

int main(int argc, char** argv) { return maskpf::run_cli(argc, argv); }
