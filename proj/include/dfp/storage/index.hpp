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
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dfp/common.hpp"

namespace dfp::storage {

/// A key/value entry of an ordered index. Tombstones only appear inside LSM components.
struct IndexRecord {
  VertexId key = 0;
  std::string value;
  bool tombstone = false;

  friend bool operator==(const IndexRecord&, const IndexRecord&) = default;
};

/// Ascending scan. Writes to keys at or below the last returned key may be interleaved
/// with next(); any other concurrent modification is unsupported.
class IndexCursor {
 public:
  virtual ~IndexCursor() = default;
  virtual bool next(IndexRecord& out) = 0;
};

/// Point lookups in non-decreasing key order. Consecutive probes that land in the same
/// leaf reuse it instead of descending again. The same write rule as IndexCursor applies.
class IndexProbe {
 public:
  virtual ~IndexProbe() = default;
  virtual std::optional<IndexRecord> find(VertexId key) = 0;
};

/// Streams strictly ascending records into an empty index (or a new LSM component).
class IndexLoader {
 public:
  virtual ~IndexLoader() = default;
  virtual void add(VertexId key, std::string_view value) = 0;
  virtual void finish() = 0;
};

/// Common surface of the B-tree and the LSM tree.
class OrderedIndex {
 public:
  virtual ~OrderedIndex() = default;

  virtual std::optional<std::string> get(VertexId key) = 0;
  virtual void put(VertexId key, std::string_view value) = 0;
  /// Deleting an absent key is a no-op.
  virtual void remove(VertexId key) = 0;
  virtual std::unique_ptr<IndexCursor> scan(std::optional<VertexId> from = std::nullopt) = 0;
  virtual std::unique_ptr<IndexProbe> probe() = 0;
  virtual std::unique_ptr<IndexLoader> loader() = 0;

  /// Leaf pages read since creation.
  virtual std::uint64_t leaf_reads() const = 0;
  virtual int height() const = 0;
  /// Removes the index's files.
  virtual void destroy() = 0;
};

}  // namespace dfp::storage
