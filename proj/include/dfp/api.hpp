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

// The user-facing programming model: the Vertex / Msg / GS tuple schemas, the four UDF
// slots (compute, combine, aggregate, resolve), the physical plan choice and the job
// description consumed by the runtime.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfp/common.hpp"

namespace dfp {

struct Edge {
  VertexId dest = 0;
  Blob value;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One row of the Vertex relation. halt == false means the vertex is active.
struct VertexTuple {
  VertexId vid = 0;
  bool halt = false;
  Blob value;
  std::vector<Edge> edges;

  friend bool operator==(const VertexTuple&, const VertexTuple&) = default;
};

/// One row of the Msg relation. A disengaged payload is the NULL produced by NullMsg or by
/// outer-join padding; it is distinct from an engaged, empty payload.
struct MsgTuple {
  VertexId vid = 0;
  std::optional<Blob> payload;

  friend bool operator==(const MsgTuple&, const MsgTuple&) = default;
};

/// The single GS tuple.
struct GlobalState {
  bool halt = false;
  Blob aggregate;
  std::uint64_t superstep = 1;

  friend bool operator==(const GlobalState&, const GlobalState&) = default;
};

enum class MutationKind : std::uint8_t { Insert, Delete };

/// A vertex insertion or deletion. Deletes only use vertex.vid.
struct Mutation {
  MutationKind kind = MutationKind::Insert;
  VertexTuple vertex;

  static Mutation insert(VertexTuple v) { return {MutationKind::Insert, std::move(v)}; }
  static Mutation remove(VertexId vid) { return {MutationKind::Delete, VertexTuple{vid, true, {}, {}}}; }

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

/// Output of one compute call. `vertex` starts as a copy of the input vertex (or the
/// synthesized one for a message-only vid) and is written back unconditionally.
struct ComputeOutput {
  VertexTuple vertex;
  std::vector<MsgTuple> messages;
  std::vector<Blob> aggregates;
  std::vector<Mutation> mutations;

  void send(VertexId dest, Blob payload) { messages.push_back({dest, std::move(payload)}); }
  void vote_to_halt() { vertex.halt = true; }
  void aggregate(Blob contribution) { aggregates.push_back(std::move(contribution)); }
  void add_vertex(VertexTuple v) { mutations.push_back(Mutation::insert(std::move(v))); }
  void remove_vertex(VertexId vid) { mutations.push_back(Mutation::remove(vid)); }
};

/// Input of one compute call. `messages` holds the combined payload (size <= 1) when the
/// program declares a combiner, or the gathered message list otherwise.
struct ComputeInput {
  bool vertex_present = true;
  std::span<const Blob> messages;
  const GlobalState& gs;
};

using ComputeFn = std::function<void(const ComputeInput&, ComputeOutput&)>;
using CombineFn = std::function<Blob(std::span<const Blob>)>;
using AggregateFn = std::function<Blob(std::span<const Blob>)>;
using ResolveFn = std::function<std::vector<Mutation>(std::span<const Mutation>)>;

/// Text form of opaque values, used by the graph loader and the result dumper.
struct ValueCodec {
  std::string name;
  std::function<Blob(std::string_view)> parse;
  std::function<std::string(const Blob&)> format;
};

ValueCodec f64_codec();
ValueCodec u64_codec();
ValueCodec raw_codec();

enum class JoinStrategy : std::uint8_t { FullOuter, LeftOuter };
enum class GroupByStrategy : std::uint8_t { SortBased, HashSort, Preclustered };
enum class ConnectorKind : std::uint8_t { PartitionPipelined, PartitionMergeMaterialized };
enum class StorageKind : std::uint8_t { BTree, Lsm };

/// The physical choices for a job. The legal (group-by, connector) pairs form four message
/// combination strategies; together with two joins and two storage kinds, sixteen plans.
struct PlanConfig {
  JoinStrategy join = JoinStrategy::FullOuter;
  GroupByStrategy group_by = GroupByStrategy::SortBased;
  ConnectorKind connector = ConnectorKind::PartitionPipelined;
  StorageKind storage = StorageKind::BTree;

  /// Group-by run by every producer before redistribution.
  GroupByStrategy sender_group_by() const {
    return group_by == GroupByStrategy::Preclustered ? GroupByStrategy::SortBased : group_by;
  }
  /// Group-by run by every consumer after redistribution.
  GroupByStrategy receiver_group_by() const {
    return connector == ConnectorKind::PartitionMergeMaterialized ? GroupByStrategy::Preclustered
                                                                  : group_by;
  }

  friend bool operator==(const PlanConfig&, const PlanConfig&) = default;
};

/// nullopt when legal, otherwise the reason.
std::optional<std::string> plan_violation(const PlanConfig& cfg);

/// Maps the alias (Preclustered, merge) onto (SortBased, merge); identity elsewhere.
PlanConfig canonical(const PlanConfig& cfg);

/// The sixteen canonical plans, in a fixed order.
std::vector<PlanConfig> all_plan_configs();

std::string to_string(JoinStrategy j);
std::string to_string(GroupByStrategy g);
std::string to_string(ConnectorKind c);
std::string to_string(StorageKind s);
std::string to_string(const PlanConfig& cfg);

std::optional<JoinStrategy> parse_join(std::string_view s);
std::optional<GroupByStrategy> parse_group_by(std::string_view s);
std::optional<ConnectorKind> parse_connector(std::string_view s);
std::optional<StorageKind> parse_storage(std::string_view s);

struct UserProgram {
  std::string name;
  ComputeFn compute;
  std::optional<CombineFn> combine;
  std::optional<AggregateFn> aggregate;
  std::optional<ResolveFn> resolve;
  /// Checked for every loaded vertex; a returned string is a validation error.
  std::function<std::optional<std::string>(const VertexTuple&)> validate_vertex;
  ValueCodec value_codec = raw_codec();
  ValueCodec edge_codec = raw_codec();
  /// The plan the program's author recommends; the CLI uses it when no flags are given.
  PlanConfig plan_hint;
};

/// Memory knobs. Byte counts.
struct MemoryConfig {
  std::size_t buffer_cache_bytes = std::size_t{64} << 20;
  std::size_t group_by_bytes = std::size_t{64} << 20;
  /// Share of the buffer cache reserved for LSM in-memory components.
  double lsm_memory_fraction = 0.25;
  std::size_t channel_capacity_batches = 64;
  std::size_t channel_batch_bytes = 32 << 10;
  /// How long pin() waits for an evictable frame before giving up.
  double pin_timeout_seconds = 10.0;
};

struct JobSpec {
  UserProgram program;
  std::string input_path;
  std::string output_path;
  std::string work_dir;
  /// Defaults to <work_dir>/ckpt when empty.
  std::string checkpoint_dir;
  int num_partitions = 1;
  int num_workers = 1;
  PlanConfig plan;
  std::uint64_t checkpoint_every = 0;
  std::uint64_t max_supersteps = 1'000'000;
  MemoryConfig memory;
};

/// Empty iff the job is runnable.
std::vector<std::string> validate_job(const JobSpec& spec);

/// Gathers all payloads into one list payload.
Blob default_combine(std::span<const Blob> payloads);

/// Concatenation of two list payloads; the pairwise form of default_combine.
Blob concat_lists(const Blob& a, const Blob& b);

/// Elements of a list payload produced by default_combine / concat_lists.
std::vector<Blob> decode_list(const Blob& list);

/// Global halting contribution of one compute call.
inline bool halt_contribution(const VertexTuple& v, std::span<const MsgTuple> out_messages) {
  return out_messages.empty() && v.halt;
}

// Typed helpers for the common fixed-width values.
Blob encode_f64(double v);
double decode_f64(const Blob& b);
Blob encode_u64(std::uint64_t v);
std::uint64_t decode_u64(const Blob& b);

/// Storage form of a vertex (everything but the vid).
std::string encode_vertex_record(const VertexTuple& v);
VertexTuple decode_vertex_record(VertexId vid, std::string_view record);

}  // namespace dfp
