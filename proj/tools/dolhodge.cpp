// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/cli.hpp"

int main(int argc, char** argv) { return dolhodge::cli_main(argc, argv); }
