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

#include <array>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

#include "gtpar/dense.hpp"
#include "gtpar/partition.hpp"

namespace gtpar {

enum class Primitive { kAllGather = 0, kReduceScatter, kAllToAll, kAllReduce, kBarrier };
inline constexpr int kNumPrimitives = 5;

std::string_view primitive_name(Primitive p);

struct PrimitiveCounters {
  std::int64_t calls = 0;
  std::int64_t elements_sent = 0;
  std::int64_t elements_received = 0;

  friend bool operator==(const PrimitiveCounters&, const PrimitiveCounters&) = default;
};

// Per (rank, primitive) communication totals, in elements.
class CommLedger {
 public:
  explicit CommLedger(int ranks = 0) : rows_(static_cast<std::size_t>(ranks)) {}

  int ranks() const { return static_cast<int>(rows_.size()); }
  PrimitiveCounters& at(int rank, Primitive p) {
    return rows_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(p)];
  }
  const PrimitiveCounters& at(int rank, Primitive p) const {
    return rows_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(p)];
  }

  std::int64_t total_sent(Primitive p) const;
  std::int64_t total_received(Primitive p) const;
  // Elements received by `rank` across the given primitives.
  std::int64_t received(int rank, std::initializer_list<Primitive> kinds) const;
  std::int64_t sent(int rank, std::initializer_list<Primitive> kinds) const;
  bool all_zero() const;

  // Line-delimited CSV: rank,primitive,calls,elements_sent,elements_received
  void write_report(std::ostream& os) const;

  friend bool operator==(const CommLedger&, const CommLedger&) = default;

 private:
  std::vector<std::array<PrimitiveCounters, kNumPrimitives>> rows_;
};

enum class ConcatAxis { kRows, kCols };

// Raised in ranks that were waiting when another rank failed.
class GroupAborted : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// p simulated workers exchanging dense matrices. Every collective is a
// rendezvous: all ranks post, synchronise, read each other's postings and
// synchronise again before returning. Ranks must issue the same collectives
// in the same order; a mismatch raises ProtocolError on every rank. A
// single-worker group performs no communication and records nothing.
class WorkerGroup {
 public:
  explicit WorkerGroup(int size);
  WorkerGroup(const WorkerGroup&) = delete;
  WorkerGroup& operator=(const WorkerGroup&) = delete;

  int size() const { return size_; }

  // Row-wise concatenation of every rank's block in rank order. Row counts may
  // differ between ranks; column counts must not.
  Matrix all_gather(int rank, const Matrix& local);

  // Element-wise sum over ranks (ascending rank order) of `full`, restricted to
  // the rows `plan` assigns to `rank`.
  Matrix reduce_scatter(int rank, const Matrix& full, const PartitionPlan& plan);

  // blocks[j] goes to rank j; the result concatenates the blocks received from
  // ranks 0..p-1 along `axis`.
  Matrix all_to_all(int rank, std::span<const Matrix> blocks, ConcatAxis axis);

  // Element-wise sum over ranks, replicated everywhere.
  Matrix all_reduce(int rank, const Matrix& local);

  void barrier(int rank);
  std::uint64_t barrier_generation() const;

  // Read only after all workers have joined.
  const CommLedger& ledger() const { return ledger_; }
  void reset_ledger() { ledger_ = CommLedger(size_); }

  // Wakes every waiting rank with GroupAborted.
  void abort();
  // Marks `rank` as finished; a rank still waiting for it fails instead of hanging.
  void retire(int rank);

 private:
  struct Posting {
    Primitive kind = Primitive::kBarrier;
    std::uint64_t seq = 0;
    std::span<const Matrix> blocks;
    ConcatAxis axis = ConcatAxis::kRows;
  };

  friend void run_workers(WorkerGroup& group, const std::function<void(int)>& fn);

  void check_rank(int rank) const;
  void post(int rank, Primitive kind, std::span<const Matrix> blocks, ConcatAxis axis);
  void sync();
  void validate_postings(Primitive kind) const;

  int size_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int arrived_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
  int retired_ = 0;
  std::vector<Posting> postings_;
  std::vector<std::uint64_t> next_seq_;
  std::uint64_t barrier_generation_ = 0;
  CommLedger ledger_;
};

// Runs fn(rank) for every rank on its own thread and joins them. If any rank
// throws, the group is aborted and the originating exception is rethrown.
void run_workers(WorkerGroup& group, const std::function<void(int)>& fn);

}  // namespace gtpar
