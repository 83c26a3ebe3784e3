// Copyright 2026 The d4curate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace d4 {

/// Worker count used by parallel_for. Defaults to 1. Results never depend on
/// this value: every parallel loop writes only to slots owned by its index.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Calls body(i) for every i in [0, n), splitting the range into contiguous
/// blocks over num_threads() workers. The first exception thrown by any
/// worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace d4
