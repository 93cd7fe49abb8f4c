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

#include "dfp/dataflow/group_by.hpp"

#include <algorithm>

namespace dfp::dataflow {

namespace {

constexpr std::size_t kTupleOverhead = 48;
constexpr std::size_t kRunBuffer = 64 << 10;
constexpr std::size_t kMaxFanIn = 128;

std::size_t tuple_cost(const MsgTuple& t) { return kTupleOverhead + (t.payload ? t.payload->size() : 0); }

/// Groups adjacent equal vids of a sorted partial stream and merges their payloads.
class CombineAdjacent final : public Source<MsgTuple> {
 public:
  CombineAdjacent(Source<MsgTuple>& in, const Combiner& c) : in_(in), combiner_(c) {}

  bool next(MsgTuple& out) override {
    if (!started_) {
      started_ = true;
      MsgTuple t;
      if (in_.next(t)) pending_ = std::move(t);
    }
    if (!pending_) return false;
    VertexId vid = pending_->vid;
    std::vector<Blob> parts;
    if (pending_->payload) parts.push_back(std::move(*pending_->payload));
    pending_.reset();
    MsgTuple t;
    while (in_.next(t)) {
      if (t.vid != vid) {
        pending_ = std::move(t);
        break;
      }
      if (t.payload) parts.push_back(std::move(*t.payload));
    }
    out.vid = vid;
    if (parts.empty()) {
      out.payload.reset();
    } else if (parts.size() == 1) {
      out.payload = std::move(parts[0]);
    } else {
      out.payload = combiner_.merge(parts);
    }
    return true;
  }

 private:
  Source<MsgTuple>& in_;
  const Combiner& combiner_;
  std::optional<MsgTuple> pending_;
  bool started_ = false;
};

}  // namespace

Combiner Combiner::user(CombineFn fn) {
  if (!fn) throw ContractViolation("empty combine function");
  Combiner c;
  c.fn_ = std::move(fn);
  return c;
}

Combiner Combiner::gather() { return Combiner{}; }

Blob Combiner::first(std::span<const Blob> raw) const {
  if (raw.empty()) throw ContractViolation("combine over an empty bag");
  if (fn_) return raw.size() == 1 ? raw[0] : fn_(raw);
  return default_combine(raw);
}

Blob Combiner::merge(std::span<const Blob> partials) const {
  if (partials.empty()) throw ContractViolation("combine over an empty bag");
  if (fn_) return partials.size() == 1 ? partials[0] : fn_(partials);
  Blob out;
  for (const auto& p : partials) out += p;
  return out;
}

std::vector<Blob> Combiner::unpack(const Blob& combined) const {
  if (fn_) return {combined};
  return decode_list(combined);
}

class GroupBy::RunReader final : public Source<MsgTuple> {
 public:
  explicit RunReader(const std::filesystem::path& p) : reader_(p, kRunBuffer) {}
  bool next(MsgTuple& out) override { return reader_.next(out); }

 private:
  storage::MsgFileReader reader_;
};

GroupBy::GroupBy(const Combiner& c, Stage stage, GroupByOptions opts)
    : combiner_(c), stage_(stage), opts_(std::move(opts)) {}

GroupBy::~GroupBy() {
  merged_.reset();
  merge_inputs_.clear();
  std::error_code ec;
  for (const auto& r : runs_) std::filesystem::remove(r, ec);
}

void GroupBy::spill(const std::vector<MsgTuple>& sorted_run) {
  if (sorted_run.empty()) return;
  if (opts_.tmp_dir.empty()) throw ContractViolation("group-by needs a temp directory to spill");
  auto path = storage::unique_temp_path(opts_.tmp_dir, "gb");
  storage::MsgFileWriter w(path, storage::MsgFileWriter::Order::StrictlyAscending, kRunBuffer);
  runs_.push_back(path);
  for (const auto& t : sorted_run) w.write(t);
  w.close();
  ++runs_written_;
  spilled_ = true;
  if (opts_.counters) {
    opts_.counters->spill_bytes.fetch_add(w.bytes(), std::memory_order_relaxed);
    opts_.counters->spill_runs.fetch_add(1, std::memory_order_relaxed);
  }
}

void GroupBy::finish() {
  if (finished_) return;
  finished_ = true;
  memory_ = take_memory();
  if (spilled_) build_merge();
}

void GroupBy::build_merge() {
  std::size_t fan_in = std::clamp<std::size_t>(opts_.memory_bytes / kRunBuffer, 2, kMaxFanIn);
  // Intermediate passes until the remaining runs plus the in-memory run fit one merge.
  while (runs_.size() + (memory_.empty() ? 0 : 1) > fan_in) {
    std::vector<std::unique_ptr<Source<MsgTuple>>> readers;
    std::vector<Source<MsgTuple>*> ins;
    std::vector<std::filesystem::path> consumed(runs_.begin(), runs_.begin() + static_cast<std::ptrdiff_t>(fan_in));
    for (const auto& r : consumed) {
      readers.push_back(std::make_unique<RunReader>(r));
      ins.push_back(readers.back().get());
    }
    MergeSource<MsgTuple> merged(std::move(ins), "group-by run");
    CombineAdjacent combined(merged, combiner_);
    auto path = storage::unique_temp_path(opts_.tmp_dir, "gb");
    storage::MsgFileWriter w(path, storage::MsgFileWriter::Order::StrictlyAscending, kRunBuffer);
    MsgTuple t;
    while (combined.next(t)) w.write(t);
    w.close();
    if (opts_.counters) {
      opts_.counters->spill_bytes.fetch_add(w.bytes(), std::memory_order_relaxed);
      opts_.counters->spill_runs.fetch_add(1, std::memory_order_relaxed);
    }
    readers.clear();
    std::error_code ec;
    for (const auto& r : consumed) std::filesystem::remove(r, ec);
    // The merged run takes the place of its inputs so earlier runs keep precedence on ties.
    runs_.erase(runs_.begin(), runs_.begin() + static_cast<std::ptrdiff_t>(fan_in));
    runs_.insert(runs_.begin(), path);
    ++runs_written_;
  }
  std::vector<Source<MsgTuple>*> ins;
  for (const auto& r : runs_) {
    merge_inputs_.push_back(std::make_unique<RunReader>(r));
    ins.push_back(merge_inputs_.back().get());
  }
  if (!memory_.empty()) {
    merge_inputs_.push_back(std::make_unique<VectorSource<MsgTuple>>(std::move(memory_)));
    ins.push_back(merge_inputs_.back().get());
    memory_.clear();
  }
  merge_inputs_.push_back(std::make_unique<MergeSource<MsgTuple>>(std::move(ins), "group-by run"));
  merged_ = std::make_unique<CombineAdjacent>(*merge_inputs_.back(), combiner_);
}

bool GroupBy::next(MsgTuple& out) {
  if (!finished_) throw ContractViolation("group-by read before finish()");
  if (merged_) return merged_->next(out);
  if (memory_pos_ == memory_.size()) return false;
  out = std::move(memory_[memory_pos_++]);
  return true;
}

void SortGroupBy::add(MsgTuple t) {
  bytes_ += tuple_cost(t);
  buffer_.push_back(std::move(t));
  if (bytes_ > opts_.memory_bytes) spill(sort_and_fold());
}

std::vector<MsgTuple> SortGroupBy::sort_and_fold() {
  std::stable_sort(buffer_.begin(), buffer_.end(), [](const MsgTuple& a, const MsgTuple& b) { return a.vid < b.vid; });
  std::vector<MsgTuple> out;
  std::vector<Blob> group;
  for (std::size_t i = 0; i < buffer_.size();) {
    std::size_t j = i;
    group.clear();
    for (; j < buffer_.size() && buffer_[j].vid == buffer_[i].vid; ++j) {
      if (buffer_[j].payload) group.push_back(std::move(*buffer_[j].payload));
    }
    out.push_back({buffer_[i].vid, fold(group)});
    i = j;
  }
  buffer_.clear();
  buffer_.shrink_to_fit();
  bytes_ = 0;
  return out;
}

void HashSortGroupBy::add(MsgTuple t) {
  auto [it, inserted] = table_.try_emplace(t.vid);
  if (t.payload) {
    if (!it->second) {
      std::vector<Blob> one{std::move(*t.payload)};
      it->second = fold(one);
      bytes_ += it->second->size();
    } else {
      bytes_ -= it->second->size();
      std::vector<Blob> pair{std::move(*it->second)};
      if (stage_ == Stage::Raw) {
        std::vector<Blob> one{std::move(*t.payload)};
        pair.push_back(combiner_.first(one));
      } else {
        pair.push_back(std::move(*t.payload));
      }
      it->second = combiner_.merge(pair);
      bytes_ += it->second->size();
    }
  }
  if (inserted) bytes_ += kTupleOverhead + 16;
  if (bytes_ > opts_.memory_bytes) spill(sorted_groups());
}

std::vector<MsgTuple> HashSortGroupBy::sorted_groups() {
  std::vector<MsgTuple> out;
  out.reserve(table_.size());
  for (auto& [vid, payload] : table_) out.push_back({vid, std::move(payload)});
  table_.clear();
  bytes_ = 0;
  std::sort(out.begin(), out.end(), [](const MsgTuple& a, const MsgTuple& b) { return a.vid < b.vid; });
  return out;
}

std::unique_ptr<GroupBy> make_group_by(GroupByStrategy s, const Combiner& c, Stage stage, GroupByOptions opts) {
  switch (s) {
    case GroupByStrategy::SortBased:
      return std::make_unique<SortGroupBy>(c, stage, std::move(opts));
    case GroupByStrategy::HashSort:
      return std::make_unique<HashSortGroupBy>(c, stage, std::move(opts));
    case GroupByStrategy::Preclustered:
      break;
  }
  throw ContractViolation("preclustered group-by is streaming; use PreclusteredGroupBy");
}

namespace {

class FileRun final : public Source<MsgTuple> {
 public:
  explicit FileRun(const std::filesystem::path& p) : reader_(p, kRunBuffer) {}
  bool next(MsgTuple& out) override { return reader_.next(out); }

 private:
  storage::MsgFileReader reader_;
};

std::filesystem::path merge_runs_to_file(const std::vector<std::filesystem::path>& runs, const GroupByOptions& opts) {
  std::vector<std::unique_ptr<Source<MsgTuple>>> readers;
  std::vector<Source<MsgTuple>*> ins;
  for (const auto& r : runs) {
    readers.push_back(std::make_unique<FileRun>(r));
    ins.push_back(readers.back().get());
  }
  MergeSource<MsgTuple> merged(std::move(ins), "sort run");
  auto path = storage::unique_temp_path(opts.tmp_dir, "sort");
  storage::MsgFileWriter w(path, storage::MsgFileWriter::Order::Ascending, kRunBuffer);
  MsgTuple t;
  while (merged.next(t)) w.write(t);
  w.close();
  if (opts.counters) {
    opts.counters->spill_bytes.fetch_add(w.bytes(), std::memory_order_relaxed);
    opts.counters->spill_runs.fetch_add(1, std::memory_order_relaxed);
  }
  return path;
}

}  // namespace

ExternalSort::~ExternalSort() {
  merged_.reset();
  inputs_.clear();
  std::error_code ec;
  for (const auto& r : runs_) std::filesystem::remove(r, ec);
}

void ExternalSort::add(MsgTuple t) {
  if (finished_) throw ContractViolation("add() after finish()");
  bytes_ += tuple_cost(t);
  buffer_.push_back(std::move(t));
  if (bytes_ > opts_.memory_bytes) spill();
}

void ExternalSort::spill() {
  if (buffer_.empty()) return;
  if (opts_.tmp_dir.empty()) throw ContractViolation("external sort needs a temp directory to spill");
  std::stable_sort(buffer_.begin(), buffer_.end(), [](const MsgTuple& a, const MsgTuple& b) { return a.vid < b.vid; });
  auto path = storage::unique_temp_path(opts_.tmp_dir, "sort");
  storage::MsgFileWriter w(path, storage::MsgFileWriter::Order::Ascending, kRunBuffer);
  runs_.push_back(path);
  for (const auto& t : buffer_) w.write(t);
  w.close();
  ++runs_written_;
  if (opts_.counters) {
    opts_.counters->spill_bytes.fetch_add(w.bytes(), std::memory_order_relaxed);
    opts_.counters->spill_runs.fetch_add(1, std::memory_order_relaxed);
  }
  buffer_.clear();
  buffer_.shrink_to_fit();
  bytes_ = 0;
}

void ExternalSort::finish() {
  if (finished_) return;
  finished_ = true;
  std::stable_sort(buffer_.begin(), buffer_.end(), [](const MsgTuple& a, const MsgTuple& b) { return a.vid < b.vid; });
  if (runs_.empty()) return;
  std::size_t fan_in = std::clamp<std::size_t>(opts_.memory_bytes / kRunBuffer, 2, kMaxFanIn);
  while (runs_.size() + (buffer_.empty() ? 0 : 1) > fan_in) {
    std::vector<std::filesystem::path> consumed(runs_.begin(), runs_.begin() + static_cast<std::ptrdiff_t>(fan_in));
    auto path = merge_runs_to_file(consumed, opts_);
    std::error_code ec;
    for (const auto& r : consumed) std::filesystem::remove(r, ec);
    runs_.erase(runs_.begin(), runs_.begin() + static_cast<std::ptrdiff_t>(fan_in));
    runs_.insert(runs_.begin(), path);
    ++runs_written_;
  }
  std::vector<Source<MsgTuple>*> ins;
  for (const auto& r : runs_) {
    inputs_.push_back(std::make_unique<FileRun>(r));
    ins.push_back(inputs_.back().get());
  }
  if (!buffer_.empty()) {
    inputs_.push_back(std::make_unique<VectorSource<MsgTuple>>(std::move(buffer_)));
    ins.push_back(inputs_.back().get());
    buffer_.clear();
  }
  merged_ = std::make_unique<MergeSource<MsgTuple>>(std::move(ins), "sort run");
}

bool ExternalSort::next(MsgTuple& out) {
  if (!finished_) throw ContractViolation("external sort read before finish()");
  if (merged_) return merged_->next(out);
  if (pos_ == buffer_.size()) return false;
  out = std::move(buffer_[pos_++]);
  return true;
}

PreclusteredGroupBy::PreclusteredGroupBy(Source<MsgTuple>& in, const Combiner& c, Stage stage)
    : in_(in), combiner_(c), stage_(stage) {}

bool PreclusteredGroupBy::next(MsgTuple& out) {
  if (!started_) {
    started_ = true;
    MsgTuple t;
    if (in_.next(t)) {
      check_(t.vid);
      pending_ = std::move(t);
    }
  }
  if (!pending_) return false;
  VertexId vid = pending_->vid;
  std::vector<Blob> group;
  if (pending_->payload) group.push_back(std::move(*pending_->payload));
  pending_.reset();
  MsgTuple t;
  while (in_.next(t)) {
    check_(t.vid);
    if (t.vid != vid) {
      pending_ = std::move(t);
      break;
    }
    if (t.payload) group.push_back(std::move(*t.payload));
  }
  out.vid = vid;
  if (group.empty()) {
    out.payload.reset();
  } else {
    out.payload = stage_ == Stage::Raw ? combiner_.first(group) : combiner_.merge(group);
  }
  return true;
}

}  // namespace dfp::dataflow
