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

#include "dfp/storage/buffer_cache.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <limits>
#include <string>

namespace dfp::storage {

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

BufferCache::BufferCache(std::size_t capacity_frames, std::chrono::milliseconds pin_timeout)
    : capacity_(capacity_frames == 0 ? std::numeric_limits<std::size_t>::max() : capacity_frames),
      pin_timeout_(pin_timeout) {}

BufferCache::~BufferCache() {
  std::lock_guard lock(mu_);
  for (auto& [id, f] : files_) {
    if (f.fd >= 0) ::close(f.fd);
  }
}

FileId BufferCache::open_file(const std::filesystem::path& path, bool truncate) {
  int flags = O_RDWR | O_CREAT;
  if (truncate) flags |= O_TRUNC;
  int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) throw IoError("open " + path.string() + ": " + errno_text());
  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size < 0) {
    ::close(fd);
    throw IoError("seek " + path.string() + ": " + errno_text());
  }
  std::lock_guard lock(mu_);
  FileId id = next_file_++;
  files_[id] = FileEntry{path, fd, static_cast<PageNo>(size / static_cast<off_t>(kPageSize))};
  return id;
}

BufferCache::FileEntry& BufferCache::file_entry(FileId file) {
  auto it = files_.find(file);
  if (it == files_.end()) throw ContractViolation("unknown file id " + std::to_string(file));
  return it->second;
}

const BufferCache::FileEntry& BufferCache::file_entry(FileId file) const {
  auto it = files_.find(file);
  if (it == files_.end()) throw ContractViolation("unknown file id " + std::to_string(file));
  return it->second;
}

void BufferCache::drop_frames(FileId file, bool write_dirty) {
  for (auto& fp : frames_) {
    Frame& f = *fp;
    if (!f.valid || f.id.file != file) continue;
    if (f.pin_count > 0) {
      throw ContractViolation("page " + std::to_string(f.id.page) + " of file " + std::to_string(file) +
                              " still pinned at close");
    }
    if (write_dirty && f.dirty) write_back(f);
    lru_remove(f);
    table_.erase(f.id);
    f.valid = false;
    f.dirty = false;
    free_frames_.push_back(&f);
    --counters_.resident;
  }
  frame_released_.notify_all();
}

void BufferCache::close_file(FileId file) {
  std::lock_guard lock(mu_);
  drop_frames(file, true);
  auto& entry = file_entry(file);
  ::close(entry.fd);
  files_.erase(file);
}

void BufferCache::delete_file(FileId file) {
  std::lock_guard lock(mu_);
  drop_frames(file, false);
  auto& entry = file_entry(file);
  ::close(entry.fd);
  std::error_code ec;
  std::filesystem::remove(entry.path, ec);
  files_.erase(file);
}

void BufferCache::flush_file(FileId file) {
  std::lock_guard lock(mu_);
  for (auto& fp : frames_) {
    if (fp->valid && fp->id.file == file && fp->dirty) write_back(*fp);
  }
  if (::fsync(file_entry(file).fd) != 0) throw IoError("fsync: " + errno_text());
}

PageNo BufferCache::page_count(FileId file) const {
  std::lock_guard lock(mu_);
  return file_entry(file).pages;
}

PageNo BufferCache::allocate_page(FileId file) {
  std::lock_guard lock(mu_);
  return file_entry(file).pages++;
}

void BufferCache::lru_remove(Frame& f) {
  if (f.in_lru) {
    lru_.erase(f.lru_pos);
    f.in_lru = false;
  }
}

void BufferCache::write_back(Frame& f) {
  auto& entry = file_entry(f.id.file);
  auto off = static_cast<off_t>(f.id.page) * static_cast<off_t>(kPageSize);
  ssize_t n = ::pwrite(entry.fd, f.data.get(), kPageSize, off);
  if (n != static_cast<ssize_t>(kPageSize)) throw IoError("write-back to " + entry.path.string() + ": " + errno_text());
  f.dirty = false;
  counters_.write_back_bytes += kPageSize;
}

void BufferCache::read_page(Frame& f) {
  auto& entry = file_entry(f.id.file);
  if (f.id.page >= entry.pages) {
    throw ContractViolation("page " + std::to_string(f.id.page) + " beyond end of " + entry.path.string());
  }
  auto off = static_cast<off_t>(f.id.page) * static_cast<off_t>(kPageSize);
  ssize_t n = ::pread(entry.fd, f.data.get(), kPageSize, off);
  if (n < 0) throw IoError("read from " + entry.path.string() + ": " + errno_text());
  // Allocated pages that were never written back read short; they are zero pages.
  if (n < static_cast<ssize_t>(kPageSize)) std::memset(f.data.get() + n, 0, kPageSize - static_cast<std::size_t>(n));
}

std::size_t BufferCache::usable_capacity() const {
  if (capacity_ == std::numeric_limits<std::size_t>::max()) return capacity_;
  return capacity_ > reserved_ + 8 ? capacity_ - reserved_ : std::min<std::size_t>(capacity_, 8);
}

BufferCache::Frame* BufferCache::acquire_frame(std::unique_lock<std::mutex>& lock, PageId wanted) {
  auto deadline = std::chrono::steady_clock::now() + pin_timeout_;
  for (;;) {
    // Another thread may have loaded the page while we waited.
    if (table_.count(wanted)) return nullptr;
    if (!free_frames_.empty()) {
      Frame* f = free_frames_.back();
      free_frames_.pop_back();
      return f;
    }
    if (frames_.size() < usable_capacity()) {
      auto f = std::make_unique<Frame>();
      f->data = std::make_unique<char[]>(kPageSize);
      frames_.push_back(std::move(f));
      return frames_.back().get();
    }
    if (!lru_.empty()) {
      Frame* victim = lru_.front();
      lru_remove(*victim);
      if (victim->dirty) write_back(*victim);
      table_.erase(victim->id);
      victim->valid = false;
      --counters_.resident;
      ++counters_.evictions;
      return victim;
    }
    if (frame_released_.wait_until(lock, deadline) == std::cv_status::timeout && lru_.empty() &&
        free_frames_.empty() && !table_.count(wanted)) {
      throw CacheExhaustedError("buffer cache exhausted: all " + std::to_string(frames_.size()) +
                                " frames are pinned; configure a larger cache");
    }
  }
}

Page BufferCache::pin(PageId id) {
  std::unique_lock lock(mu_);
  for (;;) {
    auto it = table_.find(id);
    if (it != table_.end()) {
      Frame& f = *it->second;
      if (f.pin_count == 0) lru_remove(f);
      ++f.pin_count;
      ++counters_.hits;
      return Page{id, f.data.get()};
    }
    Frame* f = acquire_frame(lock, id);
    if (f == nullptr) continue;
    f->id = id;
    f->dirty = false;
    try {
      read_page(*f);
    } catch (...) {
      free_frames_.push_back(f);
      throw;
    }
    f->valid = true;
    f->pin_count = 1;
    table_[id] = f;
    ++counters_.misses;
    ++counters_.resident;
    counters_.max_resident = std::max(counters_.max_resident, counters_.resident);
    return Page{id, f->data.get()};
  }
}

void BufferCache::unpin(PageId id, bool dirty) {
  std::lock_guard lock(mu_);
  auto it = table_.find(id);
  if (it == table_.end() || it->second->pin_count == 0) {
    throw ContractViolation("unpin of page that is not pinned");
  }
  Frame& f = *it->second;
  f.dirty = f.dirty || dirty;
  if (--f.pin_count == 0) {
    lru_.push_back(&f);
    f.lru_pos = std::prev(lru_.end());
    f.in_lru = true;
    frame_released_.notify_one();
  }
}

void BufferCache::reserve_frames(std::size_t frames) {
  std::lock_guard lock(mu_);
  reserved_ += frames;
}

void BufferCache::release_frames(std::size_t frames) {
  std::lock_guard lock(mu_);
  reserved_ -= std::min(reserved_, frames);
}

CacheCounters BufferCache::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

}  // namespace dfp::storage
