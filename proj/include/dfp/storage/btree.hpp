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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfp/storage/buffer_cache.hpp"
#include "dfp/storage/index.hpp"

namespace dfp::storage {

struct LeafFill {
  std::size_t leaves = 0;
  /// Smallest used/usable ratio over every leaf but the last.
  double min_fill_except_last = 1.0;
};

/// Paged B+-tree keyed by VertexId with variable-length values. Values above
/// kMaxInlineValue bytes live in overflow page chains. Deletes never merge pages.
class BTree final : public OrderedIndex {
 public:
  static constexpr std::size_t kMaxInlineValue = 1024;

  /// Creates an empty tree, truncating any existing file.
  static std::unique_ptr<BTree> create(BufferCache& cache, const std::filesystem::path& path);
  /// Opens a tree previously persisted with sync().
  static std::unique_ptr<BTree> open(BufferCache& cache, const std::filesystem::path& path);

  ~BTree() override;
  BTree(const BTree&) = delete;
  BTree& operator=(const BTree&) = delete;

  /// Streams strictly ascending records into a freshly created tree.
  class BulkLoader {
   public:
    explicit BulkLoader(BTree& tree);
    void add(VertexId key, std::string_view value, bool tombstone = false);
    void finish();

   private:
    struct Pending {
      VertexId key;
      std::uint8_t flags;
      std::string data;
    };
    void flush_leaf();

    BTree& tree_;
    std::vector<Pending> cur_;
    std::size_t cur_bytes_ = 0;
    std::vector<std::pair<VertexId, PageNo>> leaves_;
    std::optional<VertexId> last_;
    std::uint64_t count_ = 0;
    bool finished_ = false;
  };

  BulkLoader bulk_loader();
  void bulk_load(std::span<const IndexRecord> records);

  std::optional<IndexRecord> lookup(VertexId key);
  /// Inserts or replaces. Returns true when the key was new.
  bool upsert(VertexId key, std::string_view value, bool tombstone = false);
  /// Returns true when the key was present.
  bool erase(VertexId key);

  // OrderedIndex
  std::optional<std::string> get(VertexId key) override;
  void put(VertexId key, std::string_view value) override { upsert(key, value); }
  void remove(VertexId key) override { erase(key); }
  std::unique_ptr<IndexCursor> scan(std::optional<VertexId> from = std::nullopt) override;
  std::unique_ptr<IndexProbe> probe() override;
  std::unique_ptr<IndexLoader> loader() override;
  std::uint64_t leaf_reads() const override { return leaf_reads_.load(std::memory_order_relaxed); }
  int height() const override { return static_cast<int>(height_); }
  void destroy() override;

  /// Persists the meta page and flushes dirty pages.
  void sync();

  std::uint64_t size() const { return records_; }
  std::uint32_t leaf_count() const { return leaves_; }
  std::uint64_t structure_version() const { return smo_version_; }
  const std::filesystem::path& path() const { return path_; }
  LeafFill leaf_fill();

 private:
  friend class BTreeCursor;
  friend class BTreeProbe;

  struct RawEntry {
    VertexId key;
    std::uint8_t flags;
    std::string data;
  };

  struct Descent {
    PageNo leaf = 0;
    std::vector<PageNo> path;
    std::optional<VertexId> low;
    std::optional<VertexId> high;
  };

  BTree(BufferCache& cache, std::filesystem::path path, FileId file);

  PageNo alloc_page();
  void free_page(PageNo p) { free_pages_.push_back(p); }
  Descent descend(VertexId key);
  /// Copies a leaf's entries, counting one leaf read.
  std::vector<RawEntry> read_leaf(PageNo leaf, PageNo* next);
  std::string materialize(const RawEntry& e);
  std::string make_entry_data(std::string_view value, std::uint8_t& flags);
  std::string read_overflow(PageNo head, std::uint32_t total);
  void free_overflow(PageNo head);
  void write_leaf(PageNo page, const std::vector<RawEntry>& entries, PageNo next);
  void insert_into_parent(std::vector<PageNo>& path, VertexId sep, PageNo right);
  void write_meta();

  BufferCache& cache_;
  std::filesystem::path path_;
  FileId file_;
  PageNo root_ = 1;
  std::uint32_t height_ = 1;
  std::uint64_t records_ = 0;
  std::uint32_t leaves_ = 1;
  std::vector<PageNo> free_pages_;
  std::uint64_t smo_version_ = 0;
  std::atomic<std::uint64_t> leaf_reads_{0};
  bool destroyed_ = false;
};

}  // namespace dfp::storage
