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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfp/storage/btree.hpp"

namespace dfp::storage {

/// Simplified LSM tree: one ordered in-memory component plus immutable sorted disk
/// components (newest last). Deletes are tombstones until a full merge. Flushes happen
/// when the memory component outgrows its budget; merges only when asked.
class LsmTree final : public OrderedIndex {
 public:
  /// Disk components are named `<prefix>.<seq>`.
  LsmTree(BufferCache& cache, std::filesystem::path prefix, std::size_t memory_budget_bytes);
  ~LsmTree() override;

  LsmTree(const LsmTree&) = delete;
  LsmTree& operator=(const LsmTree&) = delete;

  std::optional<std::string> get(VertexId key) override;
  void put(VertexId key, std::string_view value) override;
  void remove(VertexId key) override;
  std::unique_ptr<IndexCursor> scan(std::optional<VertexId> from = std::nullopt) override;
  std::unique_ptr<IndexProbe> probe() override;
  /// Loads directly into a new disk component.
  std::unique_ptr<IndexLoader> loader() override;
  std::uint64_t leaf_reads() const override;
  int height() const override;
  void destroy() override;

  /// Writes the memory component as a new disk component. No-op when it is empty.
  void flush();
  /// Replaces every disk component by one, dropping shadowed versions and tombstones.
  void merge();

  std::size_t disk_components() const { return disks_.size(); }
  std::size_t memory_entries() const { return mem_.size(); }
  std::size_t memory_bytes() const { return mem_bytes_; }
  std::size_t memory_budget() const { return budget_; }
  std::uint64_t version() const { return version_; }

 private:
  friend class LsmCursor;
  friend class LsmProbe;
  friend class LsmLoader;

  static std::size_t entry_cost(std::size_t value_size) { return 64 + value_size; }
  std::unique_ptr<BTree> new_component();
  void retire(std::unique_ptr<BTree> component);

  BufferCache& cache_;
  std::filesystem::path prefix_;
  std::size_t budget_;
  std::size_t reserved_frames_;
  std::map<VertexId, std::optional<std::string>> mem_;
  std::size_t mem_bytes_ = 0;
  std::vector<std::unique_ptr<BTree>> disks_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t version_ = 0;
  std::uint64_t retired_leaf_reads_ = 0;
};

}  // namespace dfp::storage
