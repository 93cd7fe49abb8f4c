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

#include <memory>
#include <vector>

#include "dfp/runtime/plan.hpp"
#include "dfp/storage/btree.hpp"
#include "dfp/storage/msg_file.hpp"
#include "dfp/storage/vertex_index.hpp"

namespace dfp::runtime {

struct PartitionState {
  int id = 0;
  std::unique_ptr<storage::VertexIndex> vertex;
  /// Vid index of the current superstep (left outer plans only).
  std::unique_ptr<storage::BTree> vid;
  std::uint64_t vertex_count = 0;
};

/// Everything that survives a superstep barrier: the partitioned Vertex (and Vid) indexes,
/// the message files on disk and the GS tuple.
class EngineState {
 public:
  EngineState(const std::filesystem::path& work_dir, const PlanConfig& plan, const MemoryConfig& memory,
              PartitionMap pmap);
  ~EngineState();

  EngineState(const EngineState&) = delete;
  EngineState& operator=(const EngineState&) = delete;

  /// Removes every partition's files and creates empty indexes for `pmap`.
  void reset_partitions(PartitionMap pmap);

  int num_partitions() const { return static_cast<int>(parts.size()); }
  std::unique_ptr<storage::BTree> create_vid_index(int partition, std::uint64_t superstep);
  std::uint64_t total_vertices() const;
  std::uint64_t vertex_leaf_reads() const;
  std::size_t lsm_budget() const;

  storage::Layout layout;
  PlanConfig plan;
  MemoryConfig memory;
  PartitionMap pmap;
  std::unique_ptr<storage::BufferCache> cache;
  std::vector<PartitionState> parts;
  GlobalState gs;
};

}  // namespace dfp::runtime
