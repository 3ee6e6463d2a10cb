// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace rpcmpi {

/// Process-wide worker count used by the pixel-parallel kernels. Defaults to 1.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [begin, end), split into contiguous chunks. Only used
/// for loops whose iterations write disjoint outputs, so results never depend
/// on the thread count. The first exception (lowest chunk) is rethrown.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace rpcmpi
