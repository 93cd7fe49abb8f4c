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

#include "dfp/storage/vertex_index.hpp"

namespace dfp::storage {

VertexIndex::VertexIndex(BufferCache& cache, const std::filesystem::path& dir, StorageKind kind,
                         std::size_t lsm_memory_budget)
    : kind_(kind) {
  std::filesystem::create_directories(dir);
  if (kind == StorageKind::BTree) {
    index_ = BTree::create(cache, dir / "vertex.btree");
  } else {
    index_ = std::make_unique<LsmTree>(cache, dir / "vertex.lsm", lsm_memory_budget);
  }
}

void VertexIndex::bulk_load(std::span<const VertexTuple> sorted) {
  auto loader = index_->loader();
  for (const auto& v : sorted) loader->add(v.vid, encode_vertex_record(v));
  loader->finish();
}

std::optional<VertexTuple> VertexIndex::lookup(VertexId vid) {
  auto rec = index_->get(vid);
  if (!rec) return std::nullopt;
  return decode_vertex_record(vid, *rec);
}

void VertexIndex::upsert(const VertexTuple& v) { index_->put(v.vid, encode_vertex_record(v)); }

void VertexIndex::erase(VertexId vid) { index_->remove(vid); }

bool VertexIndex::Scanner::next(VertexTuple& out) {
  if (!cursor_->next(rec_)) return false;
  out = decode_vertex_record(rec_.key, rec_.value);
  return true;
}

std::optional<VertexTuple> VertexIndex::Prober::find(VertexId vid) {
  auto rec = probe_->find(vid);
  if (!rec) return std::nullopt;
  return decode_vertex_record(vid, rec->value);
}

void VertexIndex::lsm_flush() {
  if (!lsm()) throw ContractViolation("lsm_flush on a b-tree vertex index");
  lsm()->flush();
}

void VertexIndex::lsm_merge() {
  if (!lsm()) throw ContractViolation("lsm_merge on a b-tree vertex index");
  lsm()->merge();
}

}  // namespace dfp::storage
