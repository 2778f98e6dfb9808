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

#include "gtpar/collectives.hpp"

#include <exception>
#include <ostream>
#include <string>
#include <thread>

namespace gtpar {

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::kAllGather: return "all_gather";
    case Primitive::kReduceScatter: return "reduce_scatter";
    case Primitive::kAllToAll: return "all_to_all";
    case Primitive::kAllReduce: return "all_reduce";
    case Primitive::kBarrier: return "barrier";
  }
  return "unknown";
}

std::int64_t CommLedger::total_sent(Primitive p) const {
  std::int64_t total = 0;
  for (int r = 0; r < ranks(); ++r) total += at(r, p).elements_sent;
  return total;
}

std::int64_t CommLedger::total_received(Primitive p) const {
  std::int64_t total = 0;
  for (int r = 0; r < ranks(); ++r) total += at(r, p).elements_received;
  return total;
}

std::int64_t CommLedger::received(int rank, std::initializer_list<Primitive> kinds) const {
  std::int64_t total = 0;
  for (Primitive p : kinds) total += at(rank, p).elements_received;
  return total;
}

std::int64_t CommLedger::sent(int rank, std::initializer_list<Primitive> kinds) const {
  std::int64_t total = 0;
  for (Primitive p : kinds) total += at(rank, p).elements_sent;
  return total;
}

bool CommLedger::all_zero() const {
  for (const auto& row : rows_) {
    for (const auto& c : row) {
      if (c != PrimitiveCounters{}) return false;
    }
  }
  return true;
}

void CommLedger::write_report(std::ostream& os) const {
  os << "rank,primitive,calls,elements_sent,elements_received\n";
  for (int r = 0; r < ranks(); ++r) {
    for (int k = 0; k < kNumPrimitives; ++k) {
      const auto& c = at(r, static_cast<Primitive>(k));
      os << r << ',' << primitive_name(static_cast<Primitive>(k)) << ',' << c.calls << ','
         << c.elements_sent << ',' << c.elements_received << '\n';
    }
  }
}

WorkerGroup::WorkerGroup(int size)
    : size_(size), postings_(static_cast<std::size_t>(size > 0 ? size : 0)),
      next_seq_(static_cast<std::size_t>(size > 0 ? size : 0), 0), ledger_(size > 0 ? size : 0) {
  if (size <= 0) throw ArgumentError("worker group needs at least one worker");
}

void WorkerGroup::check_rank(int rank) const {
  if (rank < 0 || rank >= size_) throw ArgumentError("rank " + std::to_string(rank) + " out of range");
}

void WorkerGroup::sync() {
  std::unique_lock lock(mu_);
  if (aborted_) throw GroupAborted("worker group aborted");
  const std::uint64_t gen = generation_;
  if (++arrived_ == size_) {
    arrived_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  cv_.wait(lock, [&] { return generation_ != gen || aborted_ || retired_ > 0; });
  if (generation_ != gen) return;
  if (aborted_) throw GroupAborted("worker group aborted");
  throw ProtocolError("a worker left the group while others wait in a collective");
}

void WorkerGroup::abort() {
  std::lock_guard lock(mu_);
  aborted_ = true;
  cv_.notify_all();
}

void WorkerGroup::retire(int rank) {
  check_rank(rank);
  std::lock_guard lock(mu_);
  ++retired_;
  cv_.notify_all();
}

std::uint64_t WorkerGroup::barrier_generation() const {
  std::lock_guard lock(mu_);
  return barrier_generation_;
}

void WorkerGroup::post(int rank, Primitive kind, std::span<const Matrix> blocks, ConcatAxis axis) {
  check_rank(rank);
  auto& seq = next_seq_[static_cast<std::size_t>(rank)];
  {
    std::lock_guard lock(mu_);
    postings_[static_cast<std::size_t>(rank)] = Posting{kind, seq, blocks, axis};
  }
  ++seq;
  sync();
  validate_postings(kind);
}

// Every rank runs the same checks over the same postings, so a failure is
// raised on all ranks together and nobody is left waiting.
void WorkerGroup::validate_postings(Primitive kind) const {
  const Posting& ref = postings_.front();
  for (int r = 0; r < size_; ++r) {
    const Posting& p = postings_[static_cast<std::size_t>(r)];
    if (p.kind != kind || p.seq != ref.seq) {
      throw ProtocolError("collective mismatch: rank " + std::to_string(r) + " issued " +
                          std::string(primitive_name(p.kind)) + " #" + std::to_string(p.seq) +
                          " while rank 0 issued " + std::string(primitive_name(ref.kind)) + " #" +
                          std::to_string(ref.seq));
    }
  }
  switch (kind) {
    case Primitive::kAllGather:
      for (const Posting& p : postings_) {
        if (p.blocks.front().cols() != ref.blocks.front().cols()) {
          throw ProtocolError("all_gather: column counts differ across ranks");
        }
      }
      break;
    case Primitive::kReduceScatter:
    case Primitive::kAllReduce:
      for (const Posting& p : postings_) {
        if (p.blocks.front().rows() != ref.blocks.front().rows() ||
            p.blocks.front().cols() != ref.blocks.front().cols()) {
          throw ProtocolError(std::string(primitive_name(kind)) + ": shapes differ across ranks");
        }
      }
      break;
    case Primitive::kAllToAll:
      for (int r = 0; r < size_; ++r) {
        const Posting& p = postings_[static_cast<std::size_t>(r)];
        if (static_cast<int>(p.blocks.size()) != size_) {
          throw ProtocolError("all_to_all: rank " + std::to_string(r) + " supplied " +
                              std::to_string(p.blocks.size()) + " blocks for " +
                              std::to_string(size_) + " ranks");
        }
        if (p.axis != ref.axis) throw ProtocolError("all_to_all: concat axis differs across ranks");
      }
      for (int dst = 0; dst < size_; ++dst) {
        const Matrix& first = postings_.front().blocks[static_cast<std::size_t>(dst)];
        for (const Posting& p : postings_) {
          const Matrix& b = p.blocks[static_cast<std::size_t>(dst)];
          bool ok = ref.axis == ConcatAxis::kRows ? b.cols() == first.cols() : b.rows() == first.rows();
          if (!ok) throw ProtocolError("all_to_all: blocks for rank " + std::to_string(dst) +
                                       " cannot be concatenated");
        }
      }
      break;
    case Primitive::kBarrier:
      break;
  }
}

Matrix WorkerGroup::all_gather(int rank, const Matrix& local) {
  check_rank(rank);
  if (size_ == 1) return local;
  post(rank, Primitive::kAllGather, std::span<const Matrix>(&local, 1), ConcatAxis::kRows);

  std::vector<Matrix> parts;
  parts.reserve(static_cast<std::size_t>(size_));
  std::int64_t received = 0;
  for (int r = 0; r < size_; ++r) {
    const Matrix& m = postings_[static_cast<std::size_t>(r)].blocks.front();
    parts.push_back(m);
    if (r != rank) received += m.size();
  }
  Matrix out = concat_rows<double>(parts);

  auto& c = ledger_.at(rank, Primitive::kAllGather);
  ++c.calls;
  c.elements_sent += local.size() * (size_ - 1);
  c.elements_received += received;
  sync();
  return out;
}

Matrix WorkerGroup::reduce_scatter(int rank, const Matrix& full, const PartitionPlan& plan) {
  check_rank(rank);
  if (plan.num_parts() != size_ || plan.num_nodes() != full.rows()) {
    throw ProtocolError("reduce_scatter: plan does not match group size or matrix rows");
  }
  if (size_ == 1) return full;
  post(rank, Primitive::kReduceScatter, std::span<const Matrix>(&full, 1), ConcatAxis::kRows);

  const Index begin = plan.begin(rank);
  const Index rows = plan.size(rank);
  const Index cols = full.cols();
  Matrix out(rows, cols);
  auto dst = out.values();
  for (int r = 0; r < size_; ++r) {
    auto src = postings_[static_cast<std::size_t>(r)].blocks.front().values();
    for (Index i = 0; i < rows * cols; ++i) {
      dst[static_cast<std::size_t>(i)] += src[static_cast<std::size_t>(begin * cols + i)];
    }
  }

  auto& c = ledger_.at(rank, Primitive::kReduceScatter);
  ++c.calls;
  c.elements_sent += full.size() - rows * cols;
  c.elements_received += rows * cols * (size_ - 1);
  sync();
  return out;
}

Matrix WorkerGroup::all_to_all(int rank, std::span<const Matrix> blocks, ConcatAxis axis) {
  check_rank(rank);
  if (size_ == 1) {
    if (blocks.size() != 1) throw ProtocolError("all_to_all: expected 1 block for 1 rank");
    return blocks.front();
  }
  post(rank, Primitive::kAllToAll, blocks, axis);

  std::vector<Matrix> parts;
  parts.reserve(static_cast<std::size_t>(size_));
  std::int64_t received = 0;
  for (int r = 0; r < size_; ++r) {
    const Matrix& m = postings_[static_cast<std::size_t>(r)].blocks[static_cast<std::size_t>(rank)];
    parts.push_back(m);
    if (r != rank) received += m.size();
  }
  Matrix out = axis == ConcatAxis::kRows ? concat_rows<double>(parts) : concat_cols<double>(parts);

  std::int64_t sent = 0;
  for (int j = 0; j < size_; ++j) {
    if (j != rank) sent += blocks[static_cast<std::size_t>(j)].size();
  }
  auto& c = ledger_.at(rank, Primitive::kAllToAll);
  ++c.calls;
  c.elements_sent += sent;
  c.elements_received += received;
  sync();
  return out;
}

Matrix WorkerGroup::all_reduce(int rank, const Matrix& local) {
  check_rank(rank);
  if (size_ == 1) return local;
  post(rank, Primitive::kAllReduce, std::span<const Matrix>(&local, 1), ConcatAxis::kRows);

  Matrix out(local.rows(), local.cols());
  for (int r = 0; r < size_; ++r) add_inplace(out, postings_[static_cast<std::size_t>(r)].blocks.front());

  auto& c = ledger_.at(rank, Primitive::kAllReduce);
  ++c.calls;
  c.elements_sent += local.size() * (size_ - 1);
  c.elements_received += local.size() * (size_ - 1);
  sync();
  return out;
}

void WorkerGroup::barrier(int rank) {
  check_rank(rank);
  if (size_ == 1) {
    std::lock_guard lock(mu_);
    ++barrier_generation_;
    return;
  }
  post(rank, Primitive::kBarrier, {}, ConcatAxis::kRows);
  ++ledger_.at(rank, Primitive::kBarrier).calls;
  if (rank == 0) {
    std::lock_guard lock(mu_);
    ++barrier_generation_;
  }
  sync();
}

void run_workers(WorkerGroup& group, const std::function<void(int)>& fn) {
  const int p = group.size();
  {
    std::lock_guard lock(group.mu_);
    group.retired_ = 0;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(p));
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      threads.emplace_back([&, r] {
        try {
          fn(r);
          group.retire(r);
        } catch (...) {
          errors[static_cast<std::size_t>(r)] = std::current_exception();
          group.abort();
        }
      });
    }
  }
  std::exception_ptr first_abort;
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const GroupAborted&) {
      if (!first_abort) first_abort = e;
    } catch (...) {
      throw;
    }
  }
  if (first_abort) std::rethrow_exception(first_abort);
}

}  // namespace gtpar
