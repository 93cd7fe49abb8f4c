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

#include "dfp/storage/btree.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace dfp::storage {

namespace {

// Page types.
constexpr std::uint8_t kMetaPage = 4;
constexpr std::uint8_t kLeafPage = 1;
constexpr std::uint8_t kInternalPage = 2;
constexpr std::uint8_t kOverflowPage = 3;

// Entry flags.
constexpr std::uint8_t kOverflowFlag = 1;
constexpr std::uint8_t kTombstoneFlag = 2;

constexpr char kMagic[8] = {'D', 'F', 'P', 'B', 'T', 'R', 'E', '1'};

// Leaf: [type:1][count:2][freeEnd:2][next:4][pad:3] then u16 slot offsets; entries grow
// down from the page end as [key:8][flags:1][len:4][data].
constexpr std::size_t kLeafHeader = 12;
constexpr std::size_t kEntryHeader = 13;

// Internal: [type:1][count:2][pad:1][child0:4] then [key:8][child:4] entries.
constexpr std::size_t kInternalHeader = 8;
constexpr std::size_t kInternalEntry = 12;
constexpr std::size_t kInternalCapacity = (kPageSize - kInternalHeader) / kInternalEntry;

// Overflow: [type:1][next:4][len:2][pad:1] then data.
constexpr std::size_t kOverflowHeader = 8;
constexpr std::size_t kOverflowCapacity = kPageSize - kOverflowHeader;

constexpr std::size_t kLeafUsable = kPageSize - kLeafHeader;

std::uint16_t leaf_nslots(const char* p) { return bytes::get_u16_be(p + 1); }
void set_leaf_count(char* p, std::uint16_t n) { bytes::put_u16_be(p + 1, n); }
std::uint16_t leaf_free_end(const char* p) {
  auto v = bytes::get_u16_be(p + 3);
  return v == 0 ? static_cast<std::uint16_t>(kPageSize & 0xffff) : v;
}
void set_leaf_free_end(char* p, std::size_t v) { bytes::put_u16_be(p + 3, static_cast<std::uint16_t>(v)); }
PageNo leaf_next(const char* p) { return bytes::get_u32_be(p + 5); }
void set_leaf_next(char* p, PageNo n) { bytes::put_u32_be(p + 5, n); }
std::uint16_t slot(const char* p, std::size_t i) { return bytes::get_u16_be(p + kLeafHeader + 2 * i); }
void set_slot(char* p, std::size_t i, std::size_t off) {
  bytes::put_u16_be(p + kLeafHeader + 2 * i, static_cast<std::uint16_t>(off));
}
VertexId entry_key(const char* p, std::size_t off) { return bytes::get_u64_be(p + off); }
std::uint8_t entry_flags(const char* p, std::size_t off) { return static_cast<std::uint8_t>(p[off + 8]); }
std::uint32_t entry_len(const char* p, std::size_t off) { return bytes::get_u32_be(p + off + 9); }

void leaf_init(char* p) {
  std::memset(p, 0, kPageSize);
  p[0] = static_cast<char>(kLeafPage);
  set_leaf_free_end(p, kPageSize);
}

std::size_t leaf_contiguous_free(const char* p) {
  return leaf_free_end(p) - (kLeafHeader + 2 * std::size_t{leaf_nslots(p)});
}

std::size_t leaf_used(const char* p) {
  std::size_t used = 2 * std::size_t{leaf_nslots(p)};
  for (std::size_t i = 0; i < leaf_nslots(p); ++i) used += kEntryHeader + entry_len(p, slot(p, i));
  return used;
}

// Index of the first slot whose key is >= key.
std::size_t leaf_lower_bound(const char* p, VertexId key) {
  std::size_t lo = 0, hi = leaf_nslots(p);
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (entry_key(p, slot(p, mid)) < key) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

void leaf_insert_at(char* p, std::size_t idx, VertexId key, std::uint8_t flags, std::string_view data) {
  std::size_t count = leaf_nslots(p);
  std::size_t size = kEntryHeader + data.size();
  std::size_t off = leaf_free_end(p) - size;
  bytes::put_u64_be(p + off, key);
  p[off + 8] = static_cast<char>(flags);
  bytes::put_u32_be(p + off + 9, static_cast<std::uint32_t>(data.size()));
  std::memcpy(p + off + kEntryHeader, data.data(), data.size());
  char* slots = p + kLeafHeader;
  std::memmove(slots + 2 * (idx + 1), slots + 2 * idx, 2 * (count - idx));
  set_slot(p, idx, off);
  set_leaf_count(p, static_cast<std::uint16_t>(count + 1));
  set_leaf_free_end(p, off);
}

void leaf_remove_at(char* p, std::size_t idx) {
  std::size_t count = leaf_nslots(p);
  char* slots = p + kLeafHeader;
  std::memmove(slots + 2 * idx, slots + 2 * (idx + 1), 2 * (count - idx - 1));
  set_leaf_count(p, static_cast<std::uint16_t>(count - 1));
}

void leaf_compact(char* p) {
  std::size_t count = leaf_nslots(p);
  std::vector<char> copy(p, p + kPageSize);
  std::size_t end = kPageSize;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t off = slot(copy.data(), i);
    std::size_t size = kEntryHeader + entry_len(copy.data(), off);
    end -= size;
    std::memcpy(p + end, copy.data() + off, size);
    set_slot(p, i, end);
  }
  set_leaf_free_end(p, end);
}

std::uint16_t internal_count(const char* p) { return bytes::get_u16_be(p + 1); }
PageNo internal_child0(const char* p) { return bytes::get_u32_be(p + 4); }
VertexId internal_key(const char* p, std::size_t i) {
  return bytes::get_u64_be(p + kInternalHeader + kInternalEntry * i);
}
PageNo internal_child(const char* p, std::size_t i) {
  return bytes::get_u32_be(p + kInternalHeader + kInternalEntry * i + 8);
}

struct InternalNode {
  PageNo child0 = 0;
  std::vector<std::pair<VertexId, PageNo>> entries;
};

InternalNode decode_internal(const char* p) {
  InternalNode n;
  n.child0 = internal_child0(p);
  std::size_t count = internal_count(p);
  n.entries.reserve(count + 1);
  for (std::size_t i = 0; i < count; ++i) n.entries.emplace_back(internal_key(p, i), internal_child(p, i));
  return n;
}

void encode_internal(char* p, const InternalNode& n) {
  std::memset(p, 0, kPageSize);
  p[0] = static_cast<char>(kInternalPage);
  bytes::put_u16_be(p + 1, static_cast<std::uint16_t>(n.entries.size()));
  bytes::put_u32_be(p + 4, n.child0);
  for (std::size_t i = 0; i < n.entries.size(); ++i) {
    char* e = p + kInternalHeader + kInternalEntry * i;
    bytes::put_u64_be(e, n.entries[i].first);
    bytes::put_u32_be(e + 8, n.entries[i].second);
  }
}

}  // namespace

BTree::BTree(BufferCache& cache, std::filesystem::path path, FileId file)
    : cache_(cache), path_(std::move(path)), file_(file) {}

std::unique_ptr<BTree> BTree::create(BufferCache& cache, const std::filesystem::path& path) {
  FileId file = cache.open_file(path, true);
  std::unique_ptr<BTree> t(new BTree(cache, path, file));
  PageNo meta = cache.allocate_page(file);
  PageNo root = cache.allocate_page(file);
  (void)meta;
  {
    PinnedPage pg(cache, {file, root});
    leaf_init(pg.data());
    pg.mark_dirty();
  }
  t->root_ = root;
  t->write_meta();
  return t;
}

std::unique_ptr<BTree> BTree::open(BufferCache& cache, const std::filesystem::path& path) {
  FileId file = cache.open_file(path, false);
  std::unique_ptr<BTree> t(new BTree(cache, path, file));
  if (cache.page_count(file) == 0) throw IoError("empty b-tree file " + path.string());
  PinnedPage pg(cache, {file, 0});
  const char* p = pg.data();
  if (std::memcmp(p, kMagic, 8) != 0) throw IoError("bad b-tree magic in " + path.string());
  t->root_ = bytes::get_u32_be(p + 8);
  t->height_ = bytes::get_u32_be(p + 12);
  t->records_ = bytes::get_u64_be(p + 16);
  t->leaves_ = bytes::get_u32_be(p + 24);
  return t;
}

BTree::~BTree() {
  if (destroyed_) return;
  try {
    write_meta();
    cache_.close_file(file_);
  } catch (...) {
    // Destructors must not throw; the file is scratch state rebuilt on recovery.
  }
}

void BTree::destroy() {
  if (destroyed_) return;
  cache_.delete_file(file_);
  destroyed_ = true;
}

void BTree::write_meta() {
  PinnedPage pg(cache_, {file_, 0});
  char* p = pg.data();
  std::memset(p, 0, kPageSize);
  p[0] = static_cast<char>(kMetaPage);
  std::memcpy(p, kMagic, 8);
  bytes::put_u32_be(p + 8, root_);
  bytes::put_u32_be(p + 12, height_);
  bytes::put_u64_be(p + 16, records_);
  bytes::put_u32_be(p + 24, leaves_);
  pg.mark_dirty();
}

void BTree::sync() {
  write_meta();
  cache_.flush_file(file_);
}

PageNo BTree::alloc_page() {
  if (!free_pages_.empty()) {
    PageNo p = free_pages_.back();
    free_pages_.pop_back();
    return p;
  }
  return cache_.allocate_page(file_);
}

BTree::Descent BTree::descend(VertexId key) {
  Descent d;
  PageNo page = root_;
  for (std::uint32_t level = 1; level < height_; ++level) {
    d.path.push_back(page);
    PinnedPage pg(cache_, {file_, page});
    const char* p = pg.data();
    std::size_t count = internal_count(p);
    // Number of separators <= key.
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (internal_key(p, mid) <= key) lo = mid + 1;
      else hi = mid;
    }
    if (lo > 0) d.low = internal_key(p, lo - 1);
    if (lo < count) d.high = internal_key(p, lo);
    page = lo == 0 ? internal_child0(p) : internal_child(p, lo - 1);
  }
  d.leaf = page;
  return d;
}

std::vector<BTree::RawEntry> BTree::read_leaf(PageNo leaf, PageNo* next) {
  PinnedPage pg(cache_, {file_, leaf});
  leaf_reads_.fetch_add(1, std::memory_order_relaxed);
  const char* p = pg.data();
  std::size_t count = leaf_nslots(p);
  std::vector<RawEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t off = slot(p, i);
    out.push_back({entry_key(p, off), entry_flags(p, off),
                   std::string(p + off + kEntryHeader, entry_len(p, off))});
  }
  if (next) *next = leaf_next(p);
  return out;
}

std::string BTree::make_entry_data(std::string_view value, std::uint8_t& flags) {
  if (value.size() <= kMaxInlineValue) return std::string(value);
  flags |= kOverflowFlag;
  // Write the chain back to front so each page knows its successor.
  std::size_t chunks = (value.size() + kOverflowCapacity - 1) / kOverflowCapacity;
  PageNo next = 0;
  for (std::size_t c = chunks; c-- > 0;) {
    PageNo page = alloc_page();
    PinnedPage pg(cache_, {file_, page});
    char* p = pg.data();
    std::memset(p, 0, kOverflowHeader);
    p[0] = static_cast<char>(kOverflowPage);
    std::size_t begin = c * kOverflowCapacity;
    std::size_t len = std::min(kOverflowCapacity, value.size() - begin);
    bytes::put_u32_be(p + 1, next);
    bytes::put_u16_be(p + 5, static_cast<std::uint16_t>(len));
    std::memcpy(p + kOverflowHeader, value.data() + begin, len);
    pg.mark_dirty();
    next = page;
  }
  std::string data(8, '\0');
  bytes::put_u32_be(data.data(), next);
  bytes::put_u32_be(data.data() + 4, static_cast<std::uint32_t>(value.size()));
  return data;
}

std::string BTree::read_overflow(PageNo head, std::uint32_t total) {
  std::string out;
  out.reserve(total);
  PageNo page = head;
  while (page != 0 && out.size() < total) {
    PinnedPage pg(cache_, {file_, page});
    const char* p = pg.data();
    if (static_cast<std::uint8_t>(p[0]) != kOverflowPage) throw IoError("broken overflow chain in " + path_.string());
    out.append(p + kOverflowHeader, bytes::get_u16_be(p + 5));
    page = bytes::get_u32_be(p + 1);
  }
  if (out.size() != total) throw IoError("short overflow chain in " + path_.string());
  return out;
}

void BTree::free_overflow(PageNo head) {
  PageNo page = head;
  while (page != 0) {
    PageNo next;
    {
      PinnedPage pg(cache_, {file_, page});
      next = bytes::get_u32_be(pg.data() + 1);
    }
    free_page(page);
    page = next;
  }
}

std::string BTree::materialize(const RawEntry& e) {
  if (!(e.flags & kOverflowFlag)) return e.data;
  return read_overflow(bytes::get_u32_be(e.data.data()), bytes::get_u32_be(e.data.data() + 4));
}

void BTree::write_leaf(PageNo page, const std::vector<RawEntry>& entries, PageNo next) {
  PinnedPage pg(cache_, {file_, page});
  char* p = pg.data();
  leaf_init(p);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    leaf_insert_at(p, i, entries[i].key, entries[i].flags, entries[i].data);
  }
  set_leaf_next(p, next);
  pg.mark_dirty();
}

std::optional<IndexRecord> BTree::lookup(VertexId key) {
  auto d = descend(key);
  RawEntry found;
  {
    PinnedPage pg(cache_, {file_, d.leaf});
    leaf_reads_.fetch_add(1, std::memory_order_relaxed);
    const char* p = pg.data();
    std::size_t idx = leaf_lower_bound(p, key);
    if (idx == leaf_nslots(p)) return std::nullopt;
    std::size_t off = slot(p, idx);
    if (entry_key(p, off) != key) return std::nullopt;
    found = {key, entry_flags(p, off), std::string(p + off + kEntryHeader, entry_len(p, off))};
  }
  return IndexRecord{key, materialize(found), (found.flags & kTombstoneFlag) != 0};
}

std::optional<std::string> BTree::get(VertexId key) {
  auto r = lookup(key);
  if (!r || r->tombstone) return std::nullopt;
  return std::move(r->value);
}

bool BTree::upsert(VertexId key, std::string_view value, bool tombstone) {
  auto d = descend(key);
  std::uint8_t flags = tombstone ? kTombstoneFlag : 0;
  std::string data = make_entry_data(value, flags);
  std::size_t size = kEntryHeader + data.size();

  PinnedPage pg(cache_, {file_, d.leaf});
  char* p = pg.data();
  std::size_t idx = leaf_lower_bound(p, key);
  bool exists = idx < leaf_nslots(p) && entry_key(p, slot(p, idx)) == key;
  if (exists) {
    std::size_t off = slot(p, idx);
    std::uint8_t old_flags = entry_flags(p, off);
    if (old_flags & kOverflowFlag) free_overflow(bytes::get_u32_be(p + off + kEntryHeader));
    if (!(old_flags & kOverflowFlag) && !(flags & kOverflowFlag) && entry_len(p, off) == data.size()) {
      p[off + 8] = static_cast<char>(flags);
      std::memcpy(p + off + kEntryHeader, data.data(), data.size());
      pg.mark_dirty();
      return false;
    }
    leaf_remove_at(p, idx);
  } else {
    ++records_;
  }
  pg.mark_dirty();

  if (leaf_contiguous_free(p) < size + 2 && kLeafUsable - leaf_used(p) >= size + 2) leaf_compact(p);
  if (leaf_contiguous_free(p) >= size + 2) {
    leaf_insert_at(p, idx, key, flags, data);
    return !exists;
  }

  // Split: gather every entry plus the new one and divide by bytes.
  std::vector<RawEntry> all;
  std::size_t count = leaf_nslots(p);
  all.reserve(count + 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t off = slot(p, i);
    all.push_back({entry_key(p, off), entry_flags(p, off),
                   std::string(p + off + kEntryHeader, entry_len(p, off))});
  }
  all.insert(all.begin() + static_cast<std::ptrdiff_t>(idx), RawEntry{key, flags, std::move(data)});
  std::size_t total = 0;
  for (const auto& e : all) total += kEntryHeader + e.data.size() + 2;
  std::size_t acc = 0, split = 0;
  while (split < all.size() - 1 && acc + kEntryHeader + all[split].data.size() + 2 <= total / 2) {
    acc += kEntryHeader + all[split].data.size() + 2;
    ++split;
  }
  if (split == 0) split = 1;
  std::vector<RawEntry> right(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(split)),
                              std::make_move_iterator(all.end()));
  all.resize(split);

  PageNo old_next = leaf_next(p);
  PageNo right_page = alloc_page();
  write_leaf(right_page, right, old_next);
  leaf_init(p);
  for (std::size_t i = 0; i < all.size(); ++i) leaf_insert_at(p, i, all[i].key, all[i].flags, all[i].data);
  set_leaf_next(p, right_page);
  pg.release();

  ++leaves_;
  ++smo_version_;
  insert_into_parent(d.path, right.front().key, right_page);
  return !exists;
}

void BTree::insert_into_parent(std::vector<PageNo>& path, VertexId sep, PageNo right) {
  if (path.empty()) {
    PageNo new_root = alloc_page();
    InternalNode n;
    n.child0 = root_;
    n.entries.emplace_back(sep, right);
    PinnedPage pg(cache_, {file_, new_root});
    encode_internal(pg.data(), n);
    pg.mark_dirty();
    root_ = new_root;
    ++height_;
    return;
  }
  PageNo parent = path.back();
  path.pop_back();
  PinnedPage pg(cache_, {file_, parent});
  InternalNode n = decode_internal(pg.data());
  auto pos = std::upper_bound(n.entries.begin(), n.entries.end(), sep,
                              [](VertexId k, const auto& e) { return k < e.first; });
  n.entries.insert(pos, {sep, right});
  if (n.entries.size() <= kInternalCapacity) {
    encode_internal(pg.data(), n);
    pg.mark_dirty();
    return;
  }
  std::size_t mid = n.entries.size() / 2;
  VertexId up = n.entries[mid].first;
  InternalNode r;
  r.child0 = n.entries[mid].second;
  r.entries.assign(n.entries.begin() + static_cast<std::ptrdiff_t>(mid) + 1, n.entries.end());
  n.entries.resize(mid);
  encode_internal(pg.data(), n);
  pg.mark_dirty();
  pg.release();
  PageNo right_page = alloc_page();
  {
    PinnedPage rp(cache_, {file_, right_page});
    encode_internal(rp.data(), r);
    rp.mark_dirty();
  }
  insert_into_parent(path, up, right_page);
}

bool BTree::erase(VertexId key) {
  auto d = descend(key);
  PinnedPage pg(cache_, {file_, d.leaf});
  char* p = pg.data();
  std::size_t idx = leaf_lower_bound(p, key);
  if (idx == leaf_nslots(p) || entry_key(p, slot(p, idx)) != key) return false;
  std::size_t off = slot(p, idx);
  if (entry_flags(p, off) & kOverflowFlag) free_overflow(bytes::get_u32_be(p + off + kEntryHeader));
  leaf_remove_at(p, idx);
  pg.mark_dirty();
  --records_;
  return true;
}

LeafFill BTree::leaf_fill() {
  LeafFill out;
  // Leftmost leaf.
  PageNo page = root_;
  for (std::uint32_t level = 1; level < height_; ++level) {
    PinnedPage pg(cache_, {file_, page});
    page = internal_child0(pg.data());
  }
  std::vector<double> fills;
  while (page != 0) {
    PinnedPage pg(cache_, {file_, page});
    fills.push_back(static_cast<double>(leaf_used(pg.data())) / static_cast<double>(kLeafUsable));
    page = leaf_next(pg.data());
  }
  out.leaves = fills.size();
  for (std::size_t i = 0; i + 1 < fills.size(); ++i) out.min_fill_except_last = std::min(out.min_fill_except_last, fills[i]);
  return out;
}

// ---- bulk loading ---------------------------------------------------------------

BTree::BulkLoader::BulkLoader(BTree& tree) : tree_(tree) {
  if (tree.records_ != 0 || tree.height_ != 1 || tree.leaves_ != 1) {
    throw ContractViolation("bulk load requires an empty, freshly created b-tree");
  }
}

BTree::BulkLoader BTree::bulk_loader() { return BulkLoader(*this); }

void BTree::BulkLoader::add(VertexId key, std::string_view value, bool tombstone) {
  if (finished_) throw ContractViolation("bulk loader already finished");
  if (last_) {
    if (key == *last_) throw DuplicateKeyError("bulk load: duplicate key " + std::to_string(key));
    if (key < *last_) {
      throw ContractViolation("bulk load: input not ascending (" + std::to_string(key) + " after " +
                              std::to_string(*last_) + ")");
    }
  }
  last_ = key;
  std::uint8_t flags = tombstone ? kTombstoneFlag : 0;
  std::string data = tree_.make_entry_data(value, flags);
  std::size_t size = kEntryHeader + data.size() + 2;
  if (cur_bytes_ + size > kLeafUsable) flush_leaf();
  cur_bytes_ += size;
  cur_.push_back({key, flags, std::move(data)});
  ++count_;
}

void BTree::BulkLoader::flush_leaf() {
  if (cur_.empty()) return;
  // The first leaf reuses the empty root page of the fresh tree.
  PageNo page = leaves_.empty() ? tree_.root_ : tree_.alloc_page();
  std::vector<RawEntry> entries;
  entries.reserve(cur_.size());
  for (auto& e : cur_) entries.push_back({e.key, e.flags, std::move(e.data)});
  tree_.write_leaf(page, entries, 0);
  if (!leaves_.empty()) {
    PinnedPage prev(tree_.cache_, {tree_.file_, leaves_.back().second});
    set_leaf_next(prev.data(), page);
    prev.mark_dirty();
  }
  leaves_.emplace_back(cur_.front().key, page);
  cur_.clear();
  cur_bytes_ = 0;
}

void BTree::BulkLoader::finish() {
  if (finished_) return;
  flush_leaf();
  finished_ = true;
  tree_.records_ = count_;
  if (leaves_.empty()) return;
  tree_.leaves_ = static_cast<std::uint32_t>(leaves_.size());
  std::vector<std::pair<VertexId, PageNo>> level = leaves_;
  std::uint32_t height = 1;
  while (level.size() > 1) {
    // Spread children evenly so that no internal node ends up with a single child.
    std::size_t fanout = kInternalCapacity + 1;
    std::size_t groups = (level.size() + fanout - 1) / fanout;
    std::size_t base = level.size() / groups, extra = level.size() % groups;
    std::vector<std::pair<VertexId, PageNo>> up;
    std::size_t i = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      std::size_t end = i + base + (g < extra ? 1 : 0);
      InternalNode n;
      n.child0 = level[i].second;
      for (std::size_t j = i + 1; j < end; ++j) n.entries.push_back(level[j]);
      PageNo page = tree_.alloc_page();
      PinnedPage pg(tree_.cache_, {tree_.file_, page});
      encode_internal(pg.data(), n);
      pg.mark_dirty();
      up.emplace_back(level[i].first, page);
      i = end;
    }
    level = std::move(up);
    ++height;
  }
  tree_.root_ = level.front().second;
  tree_.height_ = height;
  ++tree_.smo_version_;
  tree_.write_meta();
}

void BTree::bulk_load(std::span<const IndexRecord> records) {
  auto loader = bulk_loader();
  for (const auto& r : records) loader.add(r.key, r.value, r.tombstone);
  loader.finish();
}

// ---- cursors ---------------------------------------------------------------------

class BTreeCursor final : public IndexCursor {
 public:
  BTreeCursor(BTree& t, std::optional<VertexId> from) : t_(t), from_(from.value_or(0)) { seek(from_); }

  bool next(IndexRecord& out) override {
    for (;;) {
      while (pos_ < buf_.size()) {
        auto& e = buf_[pos_++];
        if (last_ && e.key <= *last_) continue;
        if (e.key < from_) continue;
        last_ = e.key;
        out.key = e.key;
        out.tombstone = (e.flags & kTombstoneFlag) != 0;
        out.value = t_.materialize(e);
        return true;
      }
      if (next_leaf_ == 0) return false;
      if (version_ != t_.structure_version()) {
        // A split moved entries since this leaf was read; find our place again.
        if (last_ && *last_ == std::numeric_limits<VertexId>::max()) return false;
        seek(last_ ? *last_ + 1 : from_);
      } else {
        buf_ = t_.read_leaf(next_leaf_, &next_leaf_);
        pos_ = 0;
      }
    }
  }

 private:
  void seek(VertexId key) {
    auto d = t_.descend(key);
    buf_ = t_.read_leaf(d.leaf, &next_leaf_);
    pos_ = 0;
    version_ = t_.structure_version();
  }

  BTree& t_;
  VertexId from_;
  std::vector<BTree::RawEntry> buf_;
  std::size_t pos_ = 0;
  PageNo next_leaf_ = 0;
  std::uint64_t version_ = 0;
  std::optional<VertexId> last_;
};

class BTreeProbe final : public IndexProbe {
 public:
  explicit BTreeProbe(BTree& t) : t_(t) {}

  std::optional<IndexRecord> find(VertexId key) override {
    if (last_ && key < *last_) {
      throw ContractViolation("index probes must be non-decreasing (" + std::to_string(key) + " after " +
                              std::to_string(*last_) + ")");
    }
    last_ = key;
    if (!(valid_ && version_ == t_.structure_version() && (!low_ || *low_ <= key) && (!high_ || key < *high_))) {
      auto d = t_.descend(key);
      buf_ = t_.read_leaf(d.leaf, nullptr);
      low_ = d.low;
      high_ = d.high;
      version_ = t_.structure_version();
      valid_ = true;
    }
    auto it = std::lower_bound(buf_.begin(), buf_.end(), key,
                               [](const BTree::RawEntry& e, VertexId k) { return e.key < k; });
    if (it == buf_.end() || it->key != key) return std::nullopt;
    return IndexRecord{key, t_.materialize(*it), (it->flags & kTombstoneFlag) != 0};
  }

 private:
  BTree& t_;
  std::vector<BTree::RawEntry> buf_;
  std::optional<VertexId> low_, high_, last_;
  std::uint64_t version_ = 0;
  bool valid_ = false;
};

std::unique_ptr<IndexCursor> BTree::scan(std::optional<VertexId> from) {
  return std::make_unique<BTreeCursor>(*this, from);
}

std::unique_ptr<IndexProbe> BTree::probe() { return std::make_unique<BTreeProbe>(*this); }

namespace {

class BTreeLoader final : public IndexLoader {
 public:
  explicit BTreeLoader(BTree& t) : loader_(t.bulk_loader()) {}
  void add(VertexId key, std::string_view value) override { loader_.add(key, value); }
  void finish() override { loader_.finish(); }

 private:
  BTree::BulkLoader loader_;
};

}  // namespace

std::unique_ptr<IndexLoader> BTree::loader() { return std::make_unique<BTreeLoader>(*this); }

}  // namespace dfp::storage
