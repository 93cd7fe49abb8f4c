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

#include <string>
#include <vector>

#include "dfp/api.hpp"

namespace dfp::runtime {

/// Partition -> worker task. Fixed for the job's lifetime except on recovery.
class PartitionMap {
 public:
  PartitionMap() = default;
  explicit PartitionMap(std::vector<int> owner) : owner_(std::move(owner)) {}

  /// Deals partitions to `workers` in order.
  static PartitionMap round_robin(int partitions, const std::vector<int>& workers);

  int partitions() const { return static_cast<int>(owner_.size()); }
  int owner(int partition) const { return owner_.at(static_cast<std::size_t>(partition)); }
  std::vector<int> partitions_of(int worker) const;
  /// Distinct workers, ascending.
  std::vector<int> workers() const;

  friend bool operator==(const PartitionMap&, const PartitionMap&) = default;

 private:
  std::vector<int> owner_;
};

enum class Flow : std::uint8_t { D1, D2, D3, D4, D5, D6, D7, D8, D9, D11, D12 };
std::string to_string(Flow f);

struct OperatorInstance {
  int id = 0;
  std::string op;
  /// -1 for the single global instance (aggregators at the master).
  int partition = -1;
  /// Worker the instance is pinned to; -1 for the master.
  int location = -1;
};

struct PlanEdge {
  int from = 0;
  int to = 0;
  Flow flow = Flow::D1;
  /// "local", "m-to-n pipelined", "m-to-n merging (sender-materialized)", "m-to-1".
  std::string connector;
};

/// The dataflow of one superstep with location constraints.
struct PhysicalPlan {
  PlanConfig config;
  PartitionMap pmap;
  std::vector<OperatorInstance> operators;
  std::vector<PlanEdge> edges;

  /// Operator names and edges without instance ids; equal for structurally equal plans.
  std::string signature() const;
  std::string describe() const;
  /// Verifies that every per-partition instance of partition k runs at pmap.owner(k).
  void check_sticky() const;
};

/// Throws ValidationError for an illegal configuration.
PhysicalPlan generate_plan(const PlanConfig& cfg, const PartitionMap& pmap);

}  // namespace dfp::runtime
