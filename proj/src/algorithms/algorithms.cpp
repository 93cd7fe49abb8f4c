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

#include "dfp/algorithms/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace dfp::algorithms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Blob min_f64(std::span<const Blob> xs) {
  double m = kInf;
  for (const auto& x : xs) m = std::min(m, decode_f64(x));
  return encode_f64(m);
}

Blob min_u64(std::span<const Blob> xs) {
  auto m = std::numeric_limits<std::uint64_t>::max();
  for (const auto& x : xs) m = std::min(m, decode_u64(x));
  return encode_u64(m);
}

Blob sum_f64(std::span<const Blob> xs) {
  double s = 0;
  for (const auto& x : xs) s += decode_f64(x);
  return encode_f64(s);
}

double edge_weight(const Edge& e) { return e.value.empty() ? 1.0 : decode_f64(e.value); }

// PageRank aggregate: [vertex count u64][dangling rank f64].
Blob pack_pr(std::uint64_t count, double dangling) {
  Blob b = encode_u64(count);
  b += encode_f64(dangling);
  return b;
}

std::pair<std::uint64_t, double> unpack_pr(const Blob& b) {
  if (b.size() != 16) throw ContractViolation("pagerank aggregate of size " + std::to_string(b.size()));
  return {decode_u64(b.substr(0, 8)), decode_f64(b.substr(8))};
}

}  // namespace

UserProgram sssp_program(VertexId source) {
  UserProgram p;
  p.name = "sssp";
  p.value_codec = f64_codec();
  p.edge_codec = f64_codec();
  p.combine = min_f64;
  p.plan_hint.join = JoinStrategy::LeftOuter;
  p.validate_vertex = [](const VertexTuple& v) -> std::optional<std::string> {
    if (!v.value.empty() && v.value.size() != 8) return "distance is not an f64";
    for (const auto& e : v.edges) {
      if (!e.value.empty() && e.value.size() != 8) return "edge weight is not an f64";
      double w = edge_weight(e);
      if (std::isnan(w) || w < 0) return "negative edge weight to " + std::to_string(e.dest);
    }
    return std::nullopt;
  };
  p.compute = [source](const ComputeInput& in, ComputeOutput& out) {
    auto& v = out.vertex;
    double dist = v.value.empty() ? kInf : decode_f64(v.value);
    double best = in.gs.superstep == 1 && v.vid == source ? 0.0 : kInf;
    for (const auto& m : in.messages) best = std::min(best, decode_f64(m));
    if (in.gs.superstep == 1 && v.value.empty()) v.value = encode_f64(kInf);
    if (best < dist) {
      v.value = encode_f64(best);
      for (const auto& e : v.edges) out.send(e.dest, encode_f64(best + edge_weight(e)));
    }
    out.vote_to_halt();
  };
  return p;
}

UserProgram pagerank_program(int iterations, double damping) {
  if (iterations < 1) throw ValidationError("pagerank needs at least one iteration");
  if (!(damping > 0 && damping < 1)) throw ValidationError("damping must lie in (0, 1)");
  UserProgram p;
  p.name = "pagerank";
  p.value_codec = f64_codec();
  p.edge_codec = raw_codec();
  p.combine = sum_f64;
  p.aggregate = [](std::span<const Blob> xs) {
    std::uint64_t count = 0;
    double dangling = 0;
    for (const auto& x : xs) {
      auto [c, d] = unpack_pr(x);
      count += c;
      dangling += d;
    }
    return pack_pr(count, dangling);
  };
  const std::uint64_t last = static_cast<std::uint64_t>(iterations) + 2;
  p.compute = [damping, last](const ComputeInput& in, ComputeOutput& out) {
    const auto s = in.gs.superstep;
    if (!in.vertex_present) {
      // Messages to a vid missing from the input graph are dropped.
      out.vote_to_halt();
      return;
    }
    if (s == 1) {
      out.aggregate(pack_pr(1, 0));
      out.vertex.halt = false;
      return;
    }
    auto [n, dangling] = unpack_pr(in.gs.aggregate);
    const double nv = static_cast<double>(n);
    double rank;
    if (s == 2) {
      rank = 1.0 / nv;
    } else {
      double sum = 0;
      for (const auto& m : in.messages) sum += decode_f64(m);
      rank = (1 - damping) / nv + damping * (sum + dangling / nv);
    }
    out.vertex.value = encode_f64(rank);
    if (s >= last) {
      out.vote_to_halt();
      return;
    }
    out.vertex.halt = false;
    if (out.vertex.edges.empty()) {
      out.aggregate(pack_pr(1, rank));
    } else {
      out.aggregate(pack_pr(1, 0));
      const double share = rank / static_cast<double>(out.vertex.edges.size());
      for (const auto& e : out.vertex.edges) out.send(e.dest, encode_f64(share));
    }
  };
  return p;
}

UserProgram cc_program() {
  UserProgram p;
  p.name = "cc";
  p.value_codec = u64_codec();
  p.edge_codec = raw_codec();
  p.combine = min_u64;
  p.validate_vertex = [](const VertexTuple& v) -> std::optional<std::string> {
    if (!v.value.empty() && v.value.size() != 8) return "label is not a u64";
    return std::nullopt;
  };
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    auto& v = out.vertex;
    const bool first = in.gs.superstep == 1 || v.value.empty();
    const std::uint64_t label = v.value.empty() ? v.vid : decode_u64(v.value);
    std::uint64_t best = label;
    for (const auto& m : in.messages) best = std::min(best, decode_u64(m));
    v.value = encode_u64(best);
    if (first || best < label) {
      for (const auto& e : v.edges) out.send(e.dest, encode_u64(best));
    }
    out.vote_to_halt();
  };
  return p;
}

namespace {

/// Deletions first, then the insertion with the greatest value.
std::vector<ScriptedMutation> resolve_script_group(std::vector<ScriptedMutation> group) {
  std::vector<ScriptedMutation> out;
  const ScriptedMutation* best = nullptr;
  for (const auto& m : group) {
    if (m.kind == MutationKind::Delete) {
      if (out.empty()) out.push_back(m);
    } else if (!best || m.value > best->value) {
      best = &m;
    }
  }
  if (best) out.push_back(*best);
  return out;
}

}  // namespace

MutationScript random_mutation_script(std::uint64_t seed, std::uint64_t vertices, std::uint64_t supersteps,
                                      std::size_t per_superstep) {
  MutationScript script;
  if (vertices == 0) return script;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> issuer(1, vertices);
  std::uniform_int_distribution<VertexId> target(1, 2 * vertices);
  std::uniform_int_distribution<std::uint64_t> value(0, 1'000'000);
  std::bernoulli_distribution coin(0.5), pair(0.2);
  for (std::uint64_t s = 1; s <= supersteps; ++s) {
    auto& ops = script.steps[s];
    while (ops.size() < per_superstep) {
      const VertexId t = target(rng);
      if (pair(rng)) {
        ops.push_back({issuer(rng), MutationKind::Delete, t, 0});
        ops.push_back({issuer(rng), MutationKind::Insert, t, value(rng)});
      } else {
        ops.push_back({issuer(rng), coin(rng) ? MutationKind::Insert : MutationKind::Delete, t, value(rng)});
      }
    }
  }
  return script;
}

UserProgram mutation_program(MutationScript script) {
  UserProgram p;
  p.name = "mutate-test";
  p.value_codec = u64_codec();
  p.edge_codec = raw_codec();
  const std::uint64_t last = script.last_superstep();
  auto steps = std::make_shared<const MutationScript>(std::move(script));
  p.compute = [steps, last](const ComputeInput& in, ComputeOutput& out) {
    const auto s = in.gs.superstep;
    auto& v = out.vertex;
    v.value = encode_u64((v.value.empty() ? 0 : decode_u64(v.value)) + s);
    if (auto it = steps->steps.find(s); it != steps->steps.end()) {
      for (const auto& m : it->second) {
        if (m.issuer != v.vid) continue;
        if (m.kind == MutationKind::Delete) {
          out.remove_vertex(m.target);
        } else {
          out.add_vertex(VertexTuple{m.target, false, encode_u64(m.value), {}});
        }
      }
    }
    v.halt = s >= last;
  };
  p.resolve = [](std::span<const Mutation> group) {
    std::vector<Mutation> out;
    const Mutation* best = nullptr;
    for (const auto& m : group) {
      if (m.kind == MutationKind::Delete) {
        if (out.empty()) out.push_back(m);
      } else if (!best || decode_u64(m.vertex.value) > decode_u64(best->vertex.value)) {
        best = &m;
      }
    }
    if (best) out.push_back(*best);
    return out;
  };
  return p;
}

std::map<VertexId, std::uint64_t> apply_mutation_script(std::map<VertexId, std::uint64_t> graph,
                                                        const MutationScript& script) {
  struct State {
    std::uint64_t value;
    bool halt;
  };
  std::map<VertexId, State> vs;
  for (auto [vid, value] : graph) vs[vid] = {value, false};
  const std::uint64_t last = script.last_superstep();
  for (std::uint64_t s = 1;; ++s) {
    std::vector<VertexId> computing;
    for (auto& [vid, st] : vs)
      if (!st.halt) computing.push_back(vid);
    std::map<VertexId, std::vector<ScriptedMutation>> groups;
    const auto it = script.steps.find(s);
    for (VertexId vid : computing) {
      auto& st = vs[vid];
      st.value += s;
      st.halt = s >= last;
      if (it == script.steps.end()) continue;
      for (const auto& m : it->second)
        if (m.issuer == vid) groups[m.target].push_back(m);
    }
    bool inserted_active = false;
    for (auto& [target, group] : groups) {
      for (const auto& m : resolve_script_group(group)) {
        if (m.kind == MutationKind::Delete) {
          vs.erase(target);
        } else {
          vs[target] = {m.value, false};
          inserted_active = true;
        }
      }
    }
    const bool all_halted = computing.empty() || s >= last;
    if (all_halted && !inserted_active) break;
  }
  std::map<VertexId, std::uint64_t> out;
  for (auto& [vid, st] : vs) out[vid] = st.value;
  return out;
}

UserProgram program_by_name(const std::string& name, const ProgramArgs& args) {
  if (name == "pagerank") return pagerank_program(args.iterations, args.damping);
  if (name == "sssp") return sssp_program(args.source);
  if (name == "cc") return cc_program();
  if (name == "mutate-test") {
    return mutation_program(
        random_mutation_script(args.script_seed, args.script_vertices, args.script_supersteps, args.script_ops));
  }
  throw ValidationError("unknown algorithm '" + name + "' (expected pagerank, sssp, cc or mutate-test)");
}

}  // namespace dfp::algorithms
