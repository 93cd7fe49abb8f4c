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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfp/api.hpp"
#include "dfp/runtime/state.hpp"

namespace dfp::io {

// Graph text: one vertex per line, `vid<TAB>value<TAB>dest:weight,dest:weight,...`.
// Trailing columns may be omitted; an edge without `:weight` has an empty value.
// Blank lines and lines starting with '#' are skipped.

/// nullopt for blank and comment lines. Throws ValidationError (without line context).
std::optional<VertexTuple> parse_vertex_line(std::string_view line, const UserProgram& program);
std::string format_vertex_line(const VertexTuple& v, const UserProgram& program);

struct GraphCounts {
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;
};

/// Parses a whole file into memory, vid-sorted. Errors name the offending line(s).
std::vector<VertexTuple> read_graph(const std::filesystem::path& file, const UserProgram& program);
void write_graph(const std::filesystem::path& file, std::span<const VertexTuple> vertices,
                 const UserProgram& program);

/// Routes every vertex to partition_fn(vid, P), sorts each partition externally and bulk
/// loads the Vertex indexes of `state`, which must be empty.
GraphCounts load_graph(const std::filesystem::path& file, runtime::EngineState& state, const UserProgram& program);

/// Writes `part-<k>.txt` per partition, vid-sorted.
void dump_result(runtime::EngineState& state, const UserProgram& program, const std::filesystem::path& dir);

/// Reads every part-*.txt of a dump, vid-sorted.
std::vector<VertexTuple> read_dump(const std::filesystem::path& dir, const UserProgram& program);

enum class GraphKind { Uniform, PowerLaw, Path, Cycle };
std::optional<GraphKind> parse_graph_kind(std::string_view s);

struct GenOptions {
  GraphKind kind = GraphKind::Uniform;
  std::uint64_t vertices = 1000;
  double avg_degree = 8;
  std::uint64_t seed = 1;
  bool undirected = false;
  /// Integer edge weights drawn from [1, max_weight]; 0 writes unweighted edges.
  std::uint32_t max_weight = 100;
};

/// Adjacency lists of a generated graph; vertex i has vid i + 1.
struct SimpleGraph {
  std::vector<std::vector<std::pair<VertexId, std::uint32_t>>> adj;

  std::uint64_t vertices() const { return adj.size(); }
  std::uint64_t edges() const;
};

SimpleGraph gen_graph(const GenOptions& opts);
void write_simple_graph(const std::filesystem::path& file, const SimpleGraph& g);
/// The vertices of `g` as `program` would load them from text.
std::vector<VertexTuple> to_vertices(const SimpleGraph& g, const UserProgram& program);

}  // namespace dfp::io
