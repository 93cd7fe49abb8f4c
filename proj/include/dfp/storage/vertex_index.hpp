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
#include <optional>
#include <span>

#include "dfp/api.hpp"
#include "dfp/storage/btree.hpp"
#include "dfp/storage/lsm.hpp"

namespace dfp::storage {

/// One partition of the Vertex relation, stored as a B-tree or an LSM tree keyed by vid.
class VertexIndex {
 public:
  /// Creates an empty index under `dir` (`vertex.btree` or `vertex.lsm.<n>`).
  VertexIndex(BufferCache& cache, const std::filesystem::path& dir, StorageKind kind,
              std::size_t lsm_memory_budget);

  StorageKind kind() const { return kind_; }

  /// Loads a strictly vid-ascending run of vertices into the empty index.
  void bulk_load(std::span<const VertexTuple> sorted);
  std::unique_ptr<IndexLoader> loader() { return index_->loader(); }

  std::optional<VertexTuple> lookup(VertexId vid);
  void upsert(const VertexTuple& v);
  /// No-op for an absent vid.
  void erase(VertexId vid);

  class Scanner {
   public:
    explicit Scanner(std::unique_ptr<IndexCursor> c) : cursor_(std::move(c)) {}
    bool next(VertexTuple& out);

   private:
    std::unique_ptr<IndexCursor> cursor_;
    IndexRecord rec_;
  };

  class Prober {
   public:
    explicit Prober(std::unique_ptr<IndexProbe> p) : probe_(std::move(p)) {}
    std::optional<VertexTuple> find(VertexId vid);

   private:
    std::unique_ptr<IndexProbe> probe_;
  };

  Scanner scan(std::optional<VertexId> from = std::nullopt) { return Scanner(index_->scan(from)); }
  Prober prober() { return Prober(index_->probe()); }

  /// LSM only; ContractViolation on a B-tree index.
  void lsm_flush();
  void lsm_merge();
  /// nullptr for a B-tree index.
  LsmTree* lsm() { return kind_ == StorageKind::Lsm ? static_cast<LsmTree*>(index_.get()) : nullptr; }

  std::uint64_t leaf_reads() const { return index_->leaf_reads(); }
  int height() const { return index_->height(); }
  OrderedIndex& raw() { return *index_; }
  void destroy() { index_->destroy(); }

 private:
  StorageKind kind_;
  std::unique_ptr<OrderedIndex> index_;
};

}  // namespace dfp::storage
