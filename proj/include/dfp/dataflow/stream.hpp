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

#include <atomic>
#include <cstdint>
#include <functional>
#include <queue>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfp/api.hpp"

namespace dfp::dataflow {

/// Pull-based tuple stream.
template <class T>
class Source {
 public:
  virtual ~Source() = default;
  /// False at end of stream.
  virtual bool next(T& out) = 0;
};

template <class T>
class VectorSource final : public Source<T> {
 public:
  explicit VectorSource(std::vector<T> items) : items_(std::move(items)) {}
  bool next(T& out) override {
    if (pos_ == items_.size()) return false;
    out = std::move(items_[pos_++]);
    return true;
  }

 private:
  std::vector<T> items_;
  std::size_t pos_ = 0;
};

template <class T>
std::vector<T> drain(Source<T>& s) {
  std::vector<T> out;
  T t;
  while (s.next(t)) out.push_back(std::move(t));
  return out;
}

inline VertexId key_of(const MsgTuple& t) { return t.vid; }
inline VertexId key_of(const Mutation& m) { return m.vertex.vid; }
inline VertexId key_of(VertexId v) { return v; }

/// Key-regression monitor: throws ContractViolation when the keys it sees go down (or
/// repeat, when `strict`).
class OrderCheck {
 public:
  OrderCheck(std::string what, bool strict) : what_(std::move(what)), strict_(strict) {}

  void operator()(VertexId k) {
    if (last_ && (k < *last_ || (strict_ && k == *last_))) {
      throw ContractViolation(what_ + ": key " + std::to_string(k) + " after " + std::to_string(*last_) +
                              (strict_ ? " (strictly ascending input required)" : " (ascending input required)"));
    }
    last_ = k;
  }
  void reset() { last_.reset(); }

 private:
  std::string what_;
  bool strict_;
  std::optional<VertexId> last_;
};

/// Wraps a stream and asserts it is vid-ascending.
template <class T>
class Monitored final : public Source<T> {
 public:
  Monitored(Source<T>& in, std::string what, bool strict = false) : in_(in), check_(std::move(what), strict) {}
  bool next(T& out) override {
    if (!in_.next(out)) return false;
    check_(key_of(out));
    return true;
  }

 private:
  Source<T>& in_;
  OrderCheck check_;
};

/// K-way merge of vid-ascending streams; equal vids drain the lower input index first.
template <class T>
class MergeSource final : public Source<T> {
 public:
  MergeSource(std::vector<Source<T>*> inputs, std::string what) : inputs_(std::move(inputs)) {
    for (std::size_t i = 0; i < inputs_.size(); ++i) checks_.emplace_back(what, false);
    heads_.resize(inputs_.size());
  }

  bool next(T& out) override {
    if (!started_) {
      started_ = true;
      for (std::size_t i = 0; i < inputs_.size(); ++i) refill(i);
    }
    if (heap_.empty()) return false;
    auto top = heap_.top();
    heap_.pop();
    out = std::move(heads_[top.second]);
    refill(top.second);
    return true;
  }

 private:
  using Entry = std::pair<VertexId, std::size_t>;

  void refill(std::size_t i) {
    if (inputs_[i]->next(heads_[i])) {
      auto k = key_of(heads_[i]);
      checks_[i](k);
      heap_.push({k, i});
    }
  }

  std::vector<Source<T>*> inputs_;
  std::vector<OrderCheck> checks_;
  std::vector<T> heads_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  bool started_ = false;
};

/// Hash partitioning shared by Vertex, Msg and mutations.
inline int partition_fn(VertexId vid, int n) {
  if (n <= 0) throw ContractViolation("partition count must be >= 1");
  return n == 1 ? 0 : static_cast<int>(mix64(vid) % static_cast<std::uint64_t>(n));
}

struct DataflowCounters {
  std::atomic<std::uint64_t> spill_bytes{0};
  std::atomic<std::uint64_t> spill_runs{0};
  std::atomic<std::uint64_t> channel_tuples{0};
  std::atomic<std::uint64_t> channel_bytes{0};
  std::atomic<std::uint64_t> materialized_bytes{0};

  void reset() {
    spill_bytes = 0;
    spill_runs = 0;
    channel_tuples = 0;
    channel_bytes = 0;
    materialized_bytes = 0;
  }
};

}  // namespace dfp::dataflow
