// Copyright 2026 The gtpar Authors. All Rights Reserved.
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

#include <cstdint>

namespace gtpar {

// Per-thread invocation counts of the compute kernels. Each simulated worker
// runs on its own thread, so counts are naturally per rank.
struct KernelCounts {
  std::int64_t mm = 0;
  std::int64_t spmm = 0;
  std::int64_t sddmm = 0;

  friend bool operator==(const KernelCounts&, const KernelCounts&) = default;
  friend KernelCounts operator-(const KernelCounts& a, const KernelCounts& b) {
    return {a.mm - b.mm, a.spmm - b.spmm, a.sddmm - b.sddmm};
  }
};

KernelCounts& thread_kernel_counts();

// Snapshot on construction; delta() reports kernels run since.
class ScopedKernelCensus {
 public:
  ScopedKernelCensus() : start_(thread_kernel_counts()) {}
  KernelCounts delta() const { return thread_kernel_counts() - start_; }

 private:
  KernelCounts start_;
};

}  // namespace gtpar
