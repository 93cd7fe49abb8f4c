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

#include "dfp/api.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace dfp {

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

ValueCodec f64_codec() {
  return {"f64",
          [](std::string_view s) -> Blob { return s.empty() ? Blob{} : encode_f64(parse_double(s)); },
          [](const Blob& b) -> std::string { return b.empty() ? std::string{} : format_double(decode_f64(b)); }};
}

ValueCodec u64_codec() {
  return {"u64",
          [](std::string_view s) -> Blob {
            if (s.empty()) return {};
            std::uint64_t v = 0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
              throw ValidationError("not an unsigned integer: '" + std::string(s) + "'");
            }
            return encode_u64(v);
          },
          [](const Blob& b) -> std::string { return b.empty() ? std::string{} : std::to_string(decode_u64(b)); }};
}

ValueCodec raw_codec() {
  return {"raw", [](std::string_view s) { return Blob(s); }, [](const Blob& b) { return std::string(b); }};
}

std::optional<std::string> plan_violation(const PlanConfig& cfg) {
  if (cfg.group_by == GroupByStrategy::Preclustered &&
      cfg.connector != ConnectorKind::PartitionMergeMaterialized) {
    return std::string(
        "preclustered group-by requires the merging connector (--connector merge): the "
        "plain partitioning connector does not deliver vid-clustered input");
  }
  return std::nullopt;
}

PlanConfig canonical(const PlanConfig& cfg) {
  PlanConfig out = cfg;
  if (out.group_by == GroupByStrategy::Preclustered &&
      out.connector == ConnectorKind::PartitionMergeMaterialized) {
    out.group_by = GroupByStrategy::SortBased;
  }
  return out;
}

std::vector<PlanConfig> all_plan_configs() {
  std::vector<PlanConfig> out;
  for (auto storage : {StorageKind::BTree, StorageKind::Lsm}) {
    for (auto join : {JoinStrategy::FullOuter, JoinStrategy::LeftOuter}) {
      for (auto connector : {ConnectorKind::PartitionPipelined, ConnectorKind::PartitionMergeMaterialized}) {
        for (auto gb : {GroupByStrategy::SortBased, GroupByStrategy::HashSort}) {
          out.push_back(PlanConfig{join, gb, connector, storage});
        }
      }
    }
  }
  return out;
}

std::string to_string(JoinStrategy j) { return j == JoinStrategy::FullOuter ? "outer" : "leftouter"; }

std::string to_string(GroupByStrategy g) {
  switch (g) {
    case GroupByStrategy::SortBased: return "sort";
    case GroupByStrategy::HashSort: return "hashsort";
    case GroupByStrategy::Preclustered: return "preclustered";
  }
  return "?";
}

std::string to_string(ConnectorKind c) {
  return c == ConnectorKind::PartitionPipelined ? "pipelined" : "merge";
}

std::string to_string(StorageKind s) { return s == StorageKind::BTree ? "btree" : "lsm"; }

std::string to_string(const PlanConfig& cfg) {
  return to_string(cfg.join) + "/" + to_string(cfg.group_by) + "/" + to_string(cfg.connector) + "/" +
         to_string(cfg.storage);
}

std::optional<JoinStrategy> parse_join(std::string_view s) {
  if (s == "outer" || s == "fullouter") return JoinStrategy::FullOuter;
  if (s == "leftouter") return JoinStrategy::LeftOuter;
  return std::nullopt;
}

std::optional<GroupByStrategy> parse_group_by(std::string_view s) {
  if (s == "sort") return GroupByStrategy::SortBased;
  if (s == "hashsort") return GroupByStrategy::HashSort;
  if (s == "preclustered") return GroupByStrategy::Preclustered;
  return std::nullopt;
}

std::optional<ConnectorKind> parse_connector(std::string_view s) {
  if (s == "pipelined") return ConnectorKind::PartitionPipelined;
  if (s == "merge") return ConnectorKind::PartitionMergeMaterialized;
  return std::nullopt;
}

std::optional<StorageKind> parse_storage(std::string_view s) {
  if (s == "btree") return StorageKind::BTree;
  if (s == "lsm") return StorageKind::Lsm;
  return std::nullopt;
}

std::vector<std::string> validate_job(const JobSpec& spec) {
  std::vector<std::string> out;
  if (spec.num_partitions < 1) out.emplace_back("numPartitions must be ≥ 1");
  if (spec.num_workers < 1) out.emplace_back("numWorkers must be ≥ 1");
  if (auto v = plan_violation(spec.plan)) out.push_back(*v);
  if (!spec.program.compute) out.emplace_back("program has no compute function");
  if (spec.memory.buffer_cache_bytes < 8 * 4096) out.emplace_back("buffer cache must hold at least 8 pages");
  if (spec.memory.group_by_bytes < 4096) out.emplace_back("group-by budget must be at least 4096 bytes");
  if (spec.memory.channel_capacity_batches < 1) out.emplace_back("channel capacity must be ≥ 1 batch");
  if (spec.memory.lsm_memory_fraction <= 0.0 || spec.memory.lsm_memory_fraction >= 1.0) {
    out.emplace_back("lsm memory fraction must lie in (0, 1)");
  }
  if (spec.max_supersteps < 1) out.emplace_back("maxSupersteps must be ≥ 1");
  return out;
}

Blob default_combine(std::span<const Blob> payloads) {
  if (payloads.empty()) throw ContractViolation("default_combine: empty payload bag");
  Blob out;
  for (const auto& p : payloads) {
    bytes::append_u32_be(out, static_cast<std::uint32_t>(p.size()));
    out += p;
  }
  return out;
}

Blob concat_lists(const Blob& a, const Blob& b) { return a + b; }

std::vector<Blob> decode_list(const Blob& list) {
  std::vector<Blob> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    if (list.size() - pos < 4) throw ContractViolation("decode_list: truncated length");
    auto len = bytes::get_u32_be(list.data() + pos);
    pos += 4;
    if (list.size() - pos < len) throw ContractViolation("decode_list: truncated element");
    out.emplace_back(list.substr(pos, len));
    pos += len;
  }
  return out;
}

Blob encode_f64(double v) {
  Blob b(8, '\0');
  std::memcpy(b.data(), &v, 8);
  return b;
}

double decode_f64(const Blob& b) {
  if (b.size() != 8) throw ContractViolation("decode_f64: expected 8 bytes, got " + std::to_string(b.size()));
  double v;
  std::memcpy(&v, b.data(), 8);
  return v;
}

Blob encode_u64(std::uint64_t v) {
  Blob b(8, '\0');
  std::memcpy(b.data(), &v, 8);
  return b;
}

std::uint64_t decode_u64(const Blob& b) {
  if (b.size() != 8) throw ContractViolation("decode_u64: expected 8 bytes, got " + std::to_string(b.size()));
  std::uint64_t v;
  std::memcpy(&v, b.data(), 8);
  return v;
}

// Layout: [halt:1][valueLen:4][value][edgeCount:4] then per edge [dest:8][len:4][bytes].
std::string encode_vertex_record(const VertexTuple& v) {
  std::size_t size = 1 + 4 + v.value.size() + 4;
  for (const auto& e : v.edges) size += 12 + e.value.size();
  std::string out;
  out.reserve(size);
  out.push_back(v.halt ? 1 : 0);
  bytes::append_u32_be(out, static_cast<std::uint32_t>(v.value.size()));
  out += v.value;
  bytes::append_u32_be(out, static_cast<std::uint32_t>(v.edges.size()));
  for (const auto& e : v.edges) {
    bytes::append_u64_be(out, e.dest);
    bytes::append_u32_be(out, static_cast<std::uint32_t>(e.value.size()));
    out += e.value;
  }
  return out;
}

VertexTuple decode_vertex_record(VertexId vid, std::string_view rec) {
  auto need = [&](std::size_t pos, std::size_t n) {
    if (rec.size() < pos + n) throw IoError("corrupt vertex record for vid " + std::to_string(vid));
  };
  VertexTuple v;
  v.vid = vid;
  need(0, 5);
  v.halt = rec[0] != 0;
  std::size_t pos = 1;
  auto vlen = bytes::get_u32_be(rec.data() + pos);
  pos += 4;
  need(pos, vlen + 4);
  v.value.assign(rec.data() + pos, vlen);
  pos += vlen;
  auto count = bytes::get_u32_be(rec.data() + pos);
  pos += 4;
  v.edges.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    need(pos, 12);
    Edge e;
    e.dest = bytes::get_u64_be(rec.data() + pos);
    auto elen = bytes::get_u32_be(rec.data() + pos + 8);
    pos += 12;
    need(pos, elen);
    e.value.assign(rec.data() + pos, elen);
    pos += elen;
    v.edges.push_back(std::move(e));
  }
  return v;
}

}  // namespace dfp
