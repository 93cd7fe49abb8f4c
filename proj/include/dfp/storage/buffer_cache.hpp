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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "dfp/common.hpp"

namespace dfp::storage {

inline constexpr std::size_t kPageSize = 4096;

using FileId = std::uint32_t;
using PageNo = std::uint32_t;

struct PageId {
  FileId file = 0;
  PageNo page = 0;

  friend bool operator==(const PageId&, const PageId&) = default;
};

struct PageIdHash {
  std::size_t operator()(const PageId& id) const noexcept {
    return static_cast<std::size_t>(mix64((std::uint64_t{id.file} << 32) | id.page));
  }
};

/// A cache frame. Only valid while pinned.
struct Page {
  PageId id;
  char* data = nullptr;
};

struct CacheCounters {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t write_back_bytes = 0;
  std::size_t resident = 0;
  std::size_t max_resident = 0;
};

/// Bounded page cache shared by every index of a job. Unpinned frames are evicted in LRU
/// order; dirty frames are written back before their frame is reused. Thread-safe.
class BufferCache {
 public:
  /// `capacity_frames` == 0 means unbounded.
  explicit BufferCache(std::size_t capacity_frames,
                       std::chrono::milliseconds pin_timeout = std::chrono::seconds(10));
  ~BufferCache();

  BufferCache(const BufferCache&) = delete;
  BufferCache& operator=(const BufferCache&) = delete;

  static std::size_t frames_for_bytes(std::size_t bytes) { return std::max<std::size_t>(bytes / kPageSize, 8); }

  /// Opens (or creates, when `truncate`) a paged file.
  FileId open_file(const std::filesystem::path& path, bool truncate);
  /// Writes back dirty pages and drops the file's frames. No page of the file may be pinned.
  void close_file(FileId file);
  /// Drops the file's frames without write-back and unlinks it.
  void delete_file(FileId file);
  /// Writes back every dirty page of the file and fsyncs it.
  void flush_file(FileId file);

  /// Number of pages the file logically holds (allocated pages included).
  PageNo page_count(FileId file) const;
  /// Extends the file by one zeroed page and returns its number.
  PageNo allocate_page(FileId file);

  /// Pins the page, reading it if absent. Blocks while no frame is evictable; throws
  /// CacheExhaustedError when nothing became evictable within the pin timeout.
  Page pin(PageId id);
  void unpin(PageId id, bool dirty);

  /// Removes frames from the pool available for paging (LSM memory components).
  void reserve_frames(std::size_t frames);
  void release_frames(std::size_t frames);

  std::size_t capacity() const { return capacity_; }
  std::size_t usable_capacity() const;
  CacheCounters counters() const;

 private:
  struct Frame {
    PageId id;
    std::unique_ptr<char[]> data;
    int pin_count = 0;
    bool dirty = false;
    bool valid = false;
    std::list<Frame*>::iterator lru_pos;
    bool in_lru = false;
  };

  struct FileEntry {
    std::filesystem::path path;
    int fd = -1;
    PageNo pages = 0;
  };

  Frame* acquire_frame(std::unique_lock<std::mutex>& lock, PageId wanted);
  void write_back(Frame& f);
  void read_page(Frame& f);
  void lru_remove(Frame& f);
  void drop_frames(FileId file, bool write_dirty);
  FileEntry& file_entry(FileId file);
  const FileEntry& file_entry(FileId file) const;

  std::size_t capacity_;
  std::size_t reserved_ = 0;
  std::chrono::milliseconds pin_timeout_;

  mutable std::mutex mu_;
  std::condition_variable frame_released_;
  std::vector<std::unique_ptr<Frame>> frames_;
  std::vector<Frame*> free_frames_;
  std::unordered_map<PageId, Frame*, PageIdHash> table_;
  std::list<Frame*> lru_;
  std::unordered_map<FileId, FileEntry> files_;
  FileId next_file_ = 1;
  CacheCounters counters_;
};

/// RAII pin.
class PinnedPage {
 public:
  PinnedPage() = default;
  PinnedPage(BufferCache& cache, PageId id) : cache_(&cache), page_(cache.pin(id)) {}
  ~PinnedPage() { release(); }

  PinnedPage(PinnedPage&& o) noexcept : cache_(o.cache_), page_(o.page_), dirty_(o.dirty_) { o.cache_ = nullptr; }
  PinnedPage& operator=(PinnedPage&& o) noexcept {
    if (this != &o) {
      release();
      cache_ = o.cache_;
      page_ = o.page_;
      dirty_ = o.dirty_;
      o.cache_ = nullptr;
    }
    return *this;
  }
  PinnedPage(const PinnedPage&) = delete;
  PinnedPage& operator=(const PinnedPage&) = delete;

  char* data() const { return page_.data; }
  PageId id() const { return page_.id; }
  void mark_dirty() { dirty_ = true; }

  void release() {
    if (cache_) {
      cache_->unpin(page_.id, dirty_);
      cache_ = nullptr;
    }
  }

 private:
  BufferCache* cache_ = nullptr;
  Page page_;
  bool dirty_ = false;
};

}  // namespace dfp::storage
