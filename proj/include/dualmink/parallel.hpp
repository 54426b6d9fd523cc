/*
 * Copyright 2026 The dualmink Authors.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <cstddef>
#include <span>
#include <functional>

namespace dualmink {

/// Caps the number of worker threads used by per-node loops. 0 restores the hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; the first exception
/// thrown by any worker is rethrown on the calling thread. Workers get at least
/// `min_chunk` indices each; pass 1 for a few expensive tasks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t min_chunk = 256);

/// Order-independent of thread count: compensated summation in index order.
double stable_sum(std::span<const double> values);

} // namespace dualmink
