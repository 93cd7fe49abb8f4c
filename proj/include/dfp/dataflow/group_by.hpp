/*
 * Copyright 2026 The dfpregel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <memory>
#include <unordered_map>

#include "dfp/dataflow/stream.hpp"
#include "dfp/storage/msg_file.hpp"

namespace dfp::dataflow {

/// Message combination in two stages. `first` folds raw payloads of one destination into a
/// partial; `merge` folds partials. A user combiner plays both roles; without one,
/// payloads are gathered into a list. NULL payloads are the identity.
class Combiner {
 public:
  static Combiner user(CombineFn fn);
  static Combiner gather();
  static Combiner for_program(const UserProgram& p) { return p.combine ? user(*p.combine) : gather(); }

  Blob first(std::span<const Blob> raw) const;
  Blob merge(std::span<const Blob> partials) const;
  bool gathers() const { return !fn_; }

  /// The messages handed to compute for a final combined payload.
  std::vector<Blob> unpack(const Blob& combined) const;

 private:
  CombineFn fn_;
};

enum class Stage : std::uint8_t { Raw, Partial };

struct GroupByOptions {
  std::size_t memory_bytes = 64 << 20;
  std::filesystem::path tmp_dir;
  DataflowCounters* counters = nullptr;
};

/// A blocking group-by: add() everything, finish(), then read the vid-ascending combined
/// stream with next(). Run files are removed when the operator is destroyed.
class GroupBy : public Source<MsgTuple> {
 public:
  ~GroupBy() override;
  virtual void add(MsgTuple t) = 0;
  void finish();
  bool next(MsgTuple& out) override;

  std::size_t runs_written() const { return runs_written_; }

 protected:
  GroupBy(const Combiner& c, Stage stage, GroupByOptions opts);

  std::optional<Blob> fold(std::vector<Blob>& payloads) const {
    if (payloads.empty()) return std::nullopt;
    return stage_ == Stage::Raw ? combiner_.first(payloads) : combiner_.merge(payloads);
  }
  /// Writes a vid-ascending, one-tuple-per-vid run.
  void spill(const std::vector<MsgTuple>& sorted_run);
  /// Hands the in-memory remainder (vid-ascending, combined) to the merge phase.
  virtual std::vector<MsgTuple> take_memory() = 0;

  const Combiner& combiner_;
  Stage stage_;
  GroupByOptions opts_;

 private:
  class RunReader;
  void build_merge();

  std::vector<std::filesystem::path> runs_;
  std::size_t runs_written_ = 0;
  bool finished_ = false;
  std::vector<MsgTuple> memory_;
  std::size_t memory_pos_ = 0;
  std::vector<std::unique_ptr<Source<MsgTuple>>> merge_inputs_;
  std::unique_ptr<Source<MsgTuple>> merged_;
  bool spilled_ = false;
};

/// Aggregation pushed into both phases of an external sort.
class SortGroupBy final : public GroupBy {
 public:
  SortGroupBy(const Combiner& c, Stage stage, GroupByOptions opts) : GroupBy(c, stage, std::move(opts)) {}
  void add(MsgTuple t) override;

 private:
  std::vector<MsgTuple> sort_and_fold();
  std::vector<MsgTuple> take_memory() override { return sort_and_fold(); }

  std::vector<MsgTuple> buffer_;
  std::size_t bytes_ = 0;
};

/// Hash aggregation in memory; groups are sorted when spilled or emitted.
class HashSortGroupBy final : public GroupBy {
 public:
  HashSortGroupBy(const Combiner& c, Stage stage, GroupByOptions opts) : GroupBy(c, stage, std::move(opts)) {}
  void add(MsgTuple t) override;

 private:
  std::vector<MsgTuple> sorted_groups();
  std::vector<MsgTuple> take_memory() override { return sorted_groups(); }

  std::unordered_map<VertexId, std::optional<Blob>> table_;
  std::size_t bytes_ = 0;
};

std::unique_ptr<GroupBy> make_group_by(GroupByStrategy s, const Combiner& c, Stage stage, GroupByOptions opts);

/// Stable external sort by vid; equal vids keep insertion order. Spills sorted runs under
/// the memory budget and merges them, in several passes if needed.
class ExternalSort final : public Source<MsgTuple> {
 public:
  explicit ExternalSort(GroupByOptions opts) : opts_(std::move(opts)) {}
  ~ExternalSort() override;
  ExternalSort(const ExternalSort&) = delete;
  ExternalSort& operator=(const ExternalSort&) = delete;

  void add(MsgTuple t);
  void finish();
  bool next(MsgTuple& out) override;
  std::size_t runs_written() const { return runs_written_; }

 private:
  void spill();

  GroupByOptions opts_;
  std::vector<MsgTuple> buffer_;
  std::size_t bytes_ = 0;
  std::vector<std::filesystem::path> runs_;
  std::size_t runs_written_ = 0;
  bool finished_ = false;
  std::size_t pos_ = 0;
  std::vector<std::unique_ptr<Source<MsgTuple>>> inputs_;
  std::unique_ptr<Source<MsgTuple>> merged_;
};

/// Single-pass group-by over a vid-clustered stream; never spills. The clustering is
/// checked by a key-regression monitor, so groups must also arrive vid-ascending.
class PreclusteredGroupBy final : public Source<MsgTuple> {
 public:
  PreclusteredGroupBy(Source<MsgTuple>& in, const Combiner& c, Stage stage);
  bool next(MsgTuple& out) override;

 private:
  Source<MsgTuple>& in_;
  const Combiner& combiner_;
  Stage stage_;
  OrderCheck check_{"preclustered group-by input", false};
  std::optional<MsgTuple> pending_;
  bool started_ = false;
};

}  // namespace dfp::dataflow
