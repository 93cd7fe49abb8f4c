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

#include <cstdint>
#include <mutex>
#include <set>
#include <vector>

namespace dfp::ft {

/// Test hook that makes workers fail at chosen supersteps. Every event fires once.
class FailureInjector {
 public:
  /// The worker's tasks abort at the start of `superstep`.
  void fail_worker_at(int worker, std::uint64_t superstep);
  /// The checkpoint taken at `superstep` dies after writing part of its files.
  void fail_checkpoint_at(std::uint64_t superstep);

  /// Throws InterruptionError if an event for (worker, superstep) is pending.
  void on_superstep_start(int worker, std::uint64_t superstep);
  bool take_checkpoint_failure(std::uint64_t superstep);

  std::size_t fired() const;

 private:
  struct WorkerEvent {
    int worker;
    std::uint64_t superstep;
    bool fired = false;
  };
  mutable std::mutex mu_;
  std::vector<WorkerEvent> workers_;
  std::vector<std::uint64_t> checkpoints_;
  std::size_t fired_ = 0;
};

/// Failed workers; they receive no partitions on recovery.
class Blacklist {
 public:
  void add(int worker) { ids_.insert(worker); }
  bool contains(int worker) const { return ids_.count(worker) != 0; }
  std::vector<int> ids() const { return {ids_.begin(), ids_.end()}; }

 private:
  std::set<int> ids_;
};

}  // namespace dfp::ft
