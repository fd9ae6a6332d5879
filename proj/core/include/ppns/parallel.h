//
// Copyright 2026 The PPNS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PPNS_PARALLEL_H_
#define PPNS_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace ppns {

// Runs fn(0) ... fn(n - 1) on up to `threads` workers (0 = hardware
// concurrency). Tasks are claimed in index order; callers that need a
// deterministic result write into per-index slots and reduce afterwards.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn);

int ResolveThreadCount(int threads);

}  // namespace ppns

#endif  // PPNS_PARALLEL_H_
