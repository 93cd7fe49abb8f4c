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

#include "dfp/storage/lsm.hpp"

#include <algorithm>
#include <limits>

namespace dfp::storage {

LsmTree::LsmTree(BufferCache& cache, std::filesystem::path prefix, std::size_t memory_budget_bytes)
    : cache_(cache),
      prefix_(std::move(prefix)),
      budget_(std::max<std::size_t>(memory_budget_bytes, kPageSize)),
      reserved_frames_(budget_ / kPageSize) {
  cache_.reserve_frames(reserved_frames_);
}

LsmTree::~LsmTree() { cache_.release_frames(reserved_frames_); }

std::unique_ptr<BTree> LsmTree::new_component() {
  auto path = prefix_;
  path += "." + std::to_string(next_seq_++);
  return BTree::create(cache_, path);
}

void LsmTree::retire(std::unique_ptr<BTree> component) {
  retired_leaf_reads_ += component->leaf_reads();
  component->destroy();
}

std::optional<std::string> LsmTree::get(VertexId key) {
  if (auto it = mem_.find(key); it != mem_.end()) return it->second;
  for (auto d = disks_.rbegin(); d != disks_.rend(); ++d) {
    if (auto r = (*d)->lookup(key)) {
      if (r->tombstone) return std::nullopt;
      return std::move(r->value);
    }
  }
  return std::nullopt;
}

void LsmTree::put(VertexId key, std::string_view value) {
  auto [it, inserted] = mem_.try_emplace(key);
  if (!inserted) mem_bytes_ -= entry_cost(it->second ? it->second->size() : 0);
  it->second = std::string(value);
  mem_bytes_ += entry_cost(value.size());
  if (mem_bytes_ > budget_) flush();
}

void LsmTree::remove(VertexId key) {
  auto [it, inserted] = mem_.try_emplace(key);
  if (!inserted) mem_bytes_ -= entry_cost(it->second ? it->second->size() : 0);
  if (disks_.empty()) {
    mem_.erase(it);
    return;
  }
  it->second = std::nullopt;
  mem_bytes_ += entry_cost(0);
  if (mem_bytes_ > budget_) flush();
}

void LsmTree::flush() {
  if (mem_.empty()) return;
  auto comp = new_component();
  {
    auto loader = comp->bulk_loader();
    for (const auto& [k, v] : mem_) loader.add(k, v ? std::string_view(*v) : std::string_view{}, !v);
    loader.finish();
  }
  disks_.push_back(std::move(comp));
  mem_.clear();
  mem_bytes_ = 0;
  ++version_;
}

void LsmTree::merge() {
  if (disks_.empty()) return;
  auto merged = new_component();
  {
    std::vector<std::unique_ptr<IndexCursor>> cursors;
    std::vector<std::optional<IndexRecord>> heads;
    for (auto& d : disks_) {
      cursors.push_back(d->scan());
      IndexRecord r;
      heads.push_back(cursors.back()->next(r) ? std::optional(std::move(r)) : std::nullopt);
    }
    auto loader = merged->bulk_loader();
    for (;;) {
      std::optional<VertexId> min;
      for (auto& h : heads) {
        if (h && (!min || h->key < *min)) min = h->key;
      }
      if (!min) break;
      std::optional<IndexRecord> winner;
      // Newest component wins: scan from the back.
      for (std::size_t i = heads.size(); i-- > 0;) {
        if (heads[i] && heads[i]->key == *min) {
          if (!winner) winner = std::move(heads[i]);
          IndexRecord r;
          heads[i] = cursors[i]->next(r) ? std::optional(std::move(r)) : std::nullopt;
        }
      }
      if (!winner->tombstone) loader.add(winner->key, winner->value);
    }
    loader.finish();
  }
  for (auto& d : disks_) retire(std::move(d));
  disks_.clear();
  disks_.push_back(std::move(merged));
  ++version_;
}

std::uint64_t LsmTree::leaf_reads() const {
  std::uint64_t n = retired_leaf_reads_;
  for (const auto& d : disks_) n += d->leaf_reads();
  return n;
}

int LsmTree::height() const {
  int h = 0;
  for (const auto& d : disks_) h = std::max(h, d->height());
  return h;
}

void LsmTree::destroy() {
  for (auto& d : disks_) retire(std::move(d));
  disks_.clear();
  mem_.clear();
  mem_bytes_ = 0;
  ++version_;
}

class LsmCursor final : public IndexCursor {
 public:
  LsmCursor(LsmTree& t, std::optional<VertexId> from) : t_(t), from_(from.value_or(0)) { seek(from_); }

  bool next(IndexRecord& out) override {
    for (;;) {
      if (version_ != t_.version_) {
        if (last_ && *last_ == std::numeric_limits<VertexId>::max()) return false;
        seek(last_ ? *last_ + 1 : from_);
      }
      std::optional<VertexId> min;
      if (mem_it_ != t_.mem_.end()) min = mem_it_->first;
      for (auto& h : heads_) {
        if (h && (!min || h->key < *min)) min = h->key;
      }
      if (!min) return false;
      bool have = false;
      bool tombstone = false;
      if (mem_it_ != t_.mem_.end() && mem_it_->first == *min) {
        have = true;
        tombstone = !mem_it_->second;
        if (!tombstone) out.value = *mem_it_->second;
        ++mem_it_;
      }
      for (std::size_t i = heads_.size(); i-- > 0;) {
        if (heads_[i] && heads_[i]->key == *min) {
          if (!have) {
            have = true;
            tombstone = heads_[i]->tombstone;
            if (!tombstone) out.value = std::move(heads_[i]->value);
          }
          IndexRecord r;
          heads_[i] = cursors_[i]->next(r) ? std::optional(std::move(r)) : std::nullopt;
        }
      }
      last_ = *min;
      if (tombstone) continue;
      out.key = *min;
      out.tombstone = false;
      return true;
    }
  }

 private:
  void seek(VertexId key) {
    mem_it_ = t_.mem_.lower_bound(key);
    cursors_.clear();
    heads_.clear();
    for (auto& d : t_.disks_) {
      cursors_.push_back(d->scan(key));
      IndexRecord r;
      heads_.push_back(cursors_.back()->next(r) ? std::optional(std::move(r)) : std::nullopt);
    }
    version_ = t_.version_;
  }

  LsmTree& t_;
  VertexId from_;
  std::optional<VertexId> last_;
  std::uint64_t version_ = 0;
  std::map<VertexId, std::optional<std::string>>::iterator mem_it_;
  std::vector<std::unique_ptr<IndexCursor>> cursors_;
  std::vector<std::optional<IndexRecord>> heads_;
};

class LsmProbe final : public IndexProbe {
 public:
  explicit LsmProbe(LsmTree& t) : t_(t) {}

  std::optional<IndexRecord> find(VertexId key) override {
    if (version_ != t_.version_ || probes_.size() != t_.disks_.size()) {
      probes_.clear();
      for (auto& d : t_.disks_) probes_.push_back(d->probe());
      version_ = t_.version_;
    }
    if (auto it = t_.mem_.find(key); it != t_.mem_.end()) {
      if (!it->second) return std::nullopt;
      return IndexRecord{key, *it->second, false};
    }
    for (std::size_t i = probes_.size(); i-- > 0;) {
      if (auto r = probes_[i]->find(key)) {
        if (r->tombstone) return std::nullopt;
        return r;
      }
    }
    return std::nullopt;
  }

 private:
  LsmTree& t_;
  std::uint64_t version_ = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::unique_ptr<IndexProbe>> probes_;
};

class LsmLoader final : public IndexLoader {
 public:
  explicit LsmLoader(LsmTree& t) : t_(t), comp_(t.new_component()), loader_(comp_->bulk_loader()) {}

  void add(VertexId key, std::string_view value) override { loader_.add(key, value); }

  void finish() override {
    loader_.finish();
    if (comp_->size() == 0) {
      comp_->destroy();
    } else {
      t_.disks_.push_back(std::move(comp_));
      ++t_.version_;
    }
  }

 private:
  LsmTree& t_;
  std::unique_ptr<BTree> comp_;
  BTree::BulkLoader loader_;
};

std::unique_ptr<IndexCursor> LsmTree::scan(std::optional<VertexId> from) {
  return std::make_unique<LsmCursor>(*this, from);
}

std::unique_ptr<IndexProbe> LsmTree::probe() { return std::make_unique<LsmProbe>(*this); }

std::unique_ptr<IndexLoader> LsmTree::loader() { return std::make_unique<LsmLoader>(*this); }

}  // namespace dfp::storage
