// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace dolhodge {

// Worker count: DOLHODGE_THREADS if set to a positive integer, else the hardware default.
int worker_count();

// Runs body(i) for i in [0, count). Every index writes only its own output slot, so the
// result is independent of the worker count. The exception of the lowest failing index
// is rethrown.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace dolhodge
