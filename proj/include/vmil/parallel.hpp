// Copyright 2026 The vmil Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstddef>
#include <functional>

namespace vmil {

// Process-wide cap on worker threads used by data-parallel loops.
// Defaults to the hardware concurrency; 0 restores the default.
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Runs body(i) for every i in [0, n). Each index is visited exactly once;
// callers write results into index-addressed slots so the outcome does not
// depend on the number of workers. The first exception thrown by any worker
// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vmil
