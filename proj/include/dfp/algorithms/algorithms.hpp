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
#include <map>
#include <vector>

#include "dfp/api.hpp"

namespace dfp::algorithms {

/// Shortest distances from `source`; values are f64, +inf when unreached. Edges without a
/// weight count as 1.
UserProgram sssp_program(VertexId source);

/// Fixed-iteration PageRank with uniform redistribution of dangling mass. Superstep 1
/// counts the vertices, superstep 2 sets every rank to 1/|V| and each later superstep
/// performs one update, so the job runs iterations + 2 supersteps.
UserProgram pagerank_program(int iterations, double damping = 0.85);

/// Minimum-label propagation over symmetric edges; values are u64 labels.
UserProgram cc_program();

struct ScriptedMutation {
  /// The vertex that issues the mutation; it only fires while the issuer exists.
  VertexId issuer = 0;
  MutationKind kind = MutationKind::Insert;
  VertexId target = 0;
  std::uint64_t value = 0;
};

/// Superstep -> mutations issued during that superstep.
struct MutationScript {
  std::map<std::uint64_t, std::vector<ScriptedMutation>> steps;

  std::uint64_t last_superstep() const { return steps.empty() ? 0 : steps.rbegin()->first; }
};

/// Random inserts and deletes over vids [1, 2 * vertices], issued by vids in [1, vertices].
MutationScript random_mutation_script(std::uint64_t seed, std::uint64_t vertices, std::uint64_t supersteps,
                                      std::size_t per_superstep);

/// Every computing vertex adds the superstep number to its u64 value and emits its scripted
/// mutations; vertices stay active until the script is exhausted. resolve applies a
/// deletion (if any) before the insertion with the greatest value.
UserProgram mutation_program(MutationScript script);

/// The single-threaded reference semantics of mutation_program over an initial graph
/// (vid -> value), as the final vid -> value map.
std::map<VertexId, std::uint64_t> apply_mutation_script(std::map<VertexId, std::uint64_t> graph,
                                                        const MutationScript& script);

/// Builds a program by CLI name: pagerank, sssp, cc, mutate-test.
struct ProgramArgs {
  VertexId source = 1;
  int iterations = 10;
  double damping = 0.85;
  std::uint64_t script_seed = 1;
  std::uint64_t script_vertices = 100;
  std::uint64_t script_supersteps = 5;
  std::size_t script_ops = 20;
};
UserProgram program_by_name(const std::string& name, const ProgramArgs& args);

}  // namespace dfp::algorithms
