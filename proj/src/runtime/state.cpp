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

#include "dfp/runtime/state.hpp"

#include <chrono>

namespace dfp::runtime {

EngineState::EngineState(const std::filesystem::path& work_dir, const PlanConfig& plan_cfg,
                         const MemoryConfig& mem, PartitionMap map)
    : layout(work_dir), plan(canonical(plan_cfg)), memory(mem) {
  auto timeout = std::chrono::milliseconds(static_cast<long long>(memory.pin_timeout_seconds * 1000));
  cache = std::make_unique<storage::BufferCache>(
      std::max<std::size_t>(memory.buffer_cache_bytes / storage::kPageSize, 8), timeout);
  std::filesystem::create_directories(work_dir);
  reset_partitions(std::move(map));
}

EngineState::~EngineState() { parts.clear(); }

std::size_t EngineState::lsm_budget() const {
  auto n = static_cast<std::size_t>(std::max(1, pmap.partitions()));
  auto bytes = static_cast<std::size_t>(static_cast<double>(memory.buffer_cache_bytes) * memory.lsm_memory_fraction);
  return std::max<std::size_t>(bytes / n, 16 * storage::kPageSize);
}

void EngineState::reset_partitions(PartitionMap map) {
  for (auto& p : parts) {
    p.vid.reset();
    p.vertex.reset();
  }
  parts.clear();
  std::error_code ec;
  for (auto& entry : std::filesystem::directory_iterator(layout.root(), ec)) {
    if (entry.path().filename().string().rfind("part-", 0) == 0) std::filesystem::remove_all(entry.path());
  }
  std::filesystem::remove_all(layout.root() / "xchg", ec);
  pmap = std::move(map);
  for (int k = 0; k < pmap.partitions(); ++k) {
    PartitionState ps;
    ps.id = k;
    std::filesystem::create_directories(layout.part_dir(k));
    ps.vertex = std::make_unique<storage::VertexIndex>(*cache, layout.part_dir(k), plan.storage, lsm_budget());
    parts.push_back(std::move(ps));
  }
}

std::unique_ptr<storage::BTree> EngineState::create_vid_index(int partition, std::uint64_t superstep) {
  return storage::BTree::create(*cache, layout.vid_path(partition, superstep));
}

std::uint64_t EngineState::total_vertices() const {
  std::uint64_t n = 0;
  for (const auto& p : parts) n += p.vertex_count;
  return n;
}

std::uint64_t EngineState::vertex_leaf_reads() const {
  std::uint64_t n = 0;
  for (const auto& p : parts) n += p.vertex->leaf_reads();
  return n;
}

}  // namespace dfp::runtime
