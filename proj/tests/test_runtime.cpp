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

#include <doctest.h>

#include <set>

#include "dfp/algorithms/algorithms.hpp"
#include "dfp/runtime/global_state.hpp"
#include "oracles.hpp"

using namespace dfp;
using namespace dfp::runtime;
using dfp::test::TempDir;

namespace {

VertexTuple vtx(VertexId vid, std::vector<std::pair<VertexId, double>> edges) {
  VertexTuple v{vid, false, {}, {}};
  for (auto [d, w] : edges) v.edges.push_back({d, encode_f64(w)});
  return v;
}

std::vector<VertexTuple> g1() { return {vtx(1, {{2, 1.0}, {3, 5.0}}), vtx(2, {{3, 2.0}}), vtx(3, {})}; }

JobSpec spec_for(const UserProgram& p, const std::filesystem::path& dir, int parts, PlanConfig plan = {}) {
  JobSpec s;
  s.program = p;
  s.work_dir = dir.string();
  s.num_partitions = parts;
  s.num_workers = parts;
  s.plan = plan;
  return s;
}

double f64_of(const VertexTuple& v) { return decode_f64(v.value); }

}  // namespace

TEST_CASE("sssp on the three-vertex graph") {
  for (const auto& cfg : all_plan_configs()) {
    CAPTURE(to_string(cfg));
    TempDir dir("rt");
    auto r = test::run_program(algorithms::sssp_program(1), g1(), cfg, 2, dir.path());
    REQUIRE(r.report.ok());
    REQUIRE(r.vertices.size() == 3);
    CHECK(f64_of(r.vertices[0]) == 0.0);
    CHECK(f64_of(r.vertices[1]) == 1.0);
    CHECK(f64_of(r.vertices[2]) == 3.0);
  }
}

TEST_CASE("first superstep writes the expected message file") {
  TempDir dir("rt");
  Job job(spec_for(algorithms::sssp_program(1), dir.path(), 1));
  job.load(g1());
  CHECK_FALSE(job.step());
  auto msgs = storage::msg_read(job.state().layout, 0, 2);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].vid == 2);
  CHECK(decode_f64(*msgs[0].payload) == 1.0);
  CHECK(msgs[1].vid == 3);
  CHECK(decode_f64(*msgs[1].payload) == 5.0);
  CHECK(job.gs().superstep == 2);
}

TEST_CASE("vid index holds the active vertices only") {
  TempDir dir("rt");
  PlanConfig cfg;
  cfg.join = JoinStrategy::LeftOuter;
  // Vertex 1 stays active for one superstep, everybody else halts.
  UserProgram p;
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    out.vertex.halt = !(out.vertex.vid == 1 && in.gs.superstep == 1);
  };
  Job job(spec_for(p, dir.path(), 2, cfg));
  job.load({vtx(1, {}), vtx(2, {}), vtx(3, {})});
  job.step();
  std::set<VertexId> active;
  for (auto& ps : job.state().parts) {
    auto c = ps.vid->scan();
    storage::IndexRecord rec;
    while (c->next(rec)) active.insert(rec.key);
  }
  CHECK(active == std::set<VertexId>{1});
  CHECK(job.step());
  CHECK(job.termination() == Termination::Halted);
  CHECK(job.gs().superstep == 3);
}

TEST_CASE("empty graph and single vertex") {
  TempDir dir("rt");
  {
    auto r = test::run_program(algorithms::sssp_program(1), {}, {}, 2, dir / "a");
    CHECK(r.report.ok());
    CHECK(r.report.supersteps == 1);
    CHECK(r.vertices.empty());
  }
  {
    auto r = test::run_program(algorithms::sssp_program(1), {vtx(1, {})}, {}, 1, dir / "b");
    CHECK(r.report.termination == Termination::Halted);
    CHECK(r.report.final_gs.superstep == 2);
    CHECK(f64_of(r.vertices[0]) == 0.0);
  }
}

TEST_CASE("unreachable vertex keeps infinity") {
  TempDir dir("rt");
  auto r = test::run_program(algorithms::sssp_program(1), {vtx(1, {}), vtx(2, {{1, 1.0}})}, {}, 2, dir.path());
  CHECK(std::isinf(f64_of(r.vertices[1])));
}

TEST_CASE("pagerank on a two-cycle") {
  for (int iters : {1, 5, 30}) {
    TempDir dir("rt");
    auto r = test::run_program(algorithms::pagerank_program(iters, 0.85), {vtx(1, {{2, 0}}), vtx(2, {{1, 0}})}, {}, 2,
                               dir.path());
    REQUIRE(r.report.ok());
    CHECK(r.report.supersteps == static_cast<std::uint64_t>(iters) + 2);
    CHECK(f64_of(r.vertices[0]) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f64_of(r.vertices[1]) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("connected components of {1-2, 3}") {
  TempDir dir("rt");
  auto r = test::run_program(algorithms::cc_program(), {vtx(1, {{2, 0}}), vtx(2, {{1, 0}}), vtx(3, {})}, {}, 3,
                             dir.path());
  REQUIRE(r.report.ok());
  CHECK(decode_u64(r.vertices[0].value) == 1);
  CHECK(decode_u64(r.vertices[1].value) == 1);
  CHECK(decode_u64(r.vertices[2].value) == 3);
}

TEST_CASE("a message reactivates a halted vertex for one superstep") {
  TempDir dir("rt");
  UserProgram p;
  p.combine = [](std::span<const Blob> xs) { return xs[0]; };
  // Vertex 1 pings vertex 2 at superstep 2; each compute appends the superstep.
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    out.vertex.value += static_cast<char>('0' + in.gs.superstep);
    if (out.vertex.vid == 1 && in.gs.superstep <= 2) {
      out.vertex.halt = false;
      if (in.gs.superstep == 2) out.send(2, "x");
    } else {
      out.vote_to_halt();
    }
  };
  for (auto join : {JoinStrategy::FullOuter, JoinStrategy::LeftOuter}) {
    PlanConfig cfg;
    cfg.join = join;
    auto r = test::run_program(p, {vtx(1, {}), vtx(2, {})}, cfg, 2, dir / to_string(join));
    CHECK(r.vertices[0].value == "123");
    CHECK(r.vertices[1].value == "13");
  }
}

TEST_CASE("messages to unknown vids create vertices") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    if (!in.vertex_present) out.vertex.value = "created";
    if (in.gs.superstep == 1) out.send(out.vertex.vid + 100, "hi");
    out.vote_to_halt();
  };
  for (auto join : {JoinStrategy::FullOuter, JoinStrategy::LeftOuter}) {
    PlanConfig cfg;
    cfg.join = join;
    auto r = test::run_program(p, {vtx(1, {}), vtx(2, {})}, cfg, 2, dir / to_string(join));
    REQUIRE(r.vertices.size() == 4);
    CHECK(r.vertices[2].vid == 101);
    CHECK(r.vertices[2].value == "created");
    CHECK(r.report.vertices == 4);
  }
}

TEST_CASE("without a combiner every message is delivered") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    if (in.gs.superstep == 1) {
      for (int i = 0; i < 3; ++i) out.send(1, std::to_string(out.vertex.vid) + ":" + std::to_string(i));
    } else {
      out.vertex.value = std::to_string(in.messages.size());
    }
    out.vote_to_halt();
  };
  for (const auto& cfg : all_plan_configs()) {
    auto r = test::run_program(p, {vtx(1, {}), vtx(2, {}), vtx(3, {})}, cfg, 2, dir / std::to_string(mix64(std::hash<std::string>{}(to_string(cfg)))));
    CHECK(r.vertices[0].value == "9");
  }
}

TEST_CASE("aggregates reach the next superstep") {
  TempDir dir("rt");
  UserProgram p;
  p.aggregate = [](std::span<const Blob> xs) {
    std::uint64_t s = 0;
    for (auto& x : xs) s += decode_u64(x);
    return encode_u64(s);
  };
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    if (in.gs.superstep == 1) {
      CHECK(in.gs.aggregate.empty());
      out.aggregate(encode_u64(out.vertex.vid));
      out.vertex.halt = false;
    } else {
      out.vertex.value = encode_u64(decode_u64(in.gs.aggregate));
      out.vote_to_halt();
    }
  };
  auto r = test::run_program(p, {vtx(1, {}), vtx(2, {}), vtx(5, {})}, {}, 3, dir.path());
  for (auto& v : r.vertices) CHECK(decode_u64(v.value) == 8);
  CHECK(r.report.final_gs.aggregate.empty());
}

TEST_CASE("max supersteps stops a job that never halts") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput&, ComputeOutput& out) { out.vertex.halt = false; };
  JobSpec s = spec_for(p, dir.path(), 1);
  s.max_supersteps = 4;
  Job job(s);
  job.load({vtx(1, {})});
  auto rep = job.run();
  CHECK(rep.termination == Termination::MaxSupersteps);
  CHECK(rep.supersteps == 4);
  CHECK(rep.ok());
}

TEST_CASE("a throwing compute fails the job with context") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput&, ComputeOutput& out) {
    if (out.vertex.vid == 7) throw std::runtime_error("boom");
  };
  JobSpec s = spec_for(p, dir.path(), 2);
  Job job(s);
  job.load({vtx(3, {}), vtx(7, {})});
  auto rep = job.run();
  CHECK(rep.termination == Termination::Failed);
  CHECK(rep.error.find("vid 7") != std::string::npos);
  CHECK(rep.error.find("boom") != std::string::npos);
}

TEST_CASE("illegal plans and bad specs are rejected") {
  TempDir dir("rt");
  PlanConfig cfg;
  cfg.group_by = GroupByStrategy::Preclustered;
  cfg.connector = ConnectorKind::PartitionPipelined;
  CHECK_THROWS_AS(Job(spec_for(algorithms::cc_program(), dir.path(), 1, cfg)), ValidationError);
  CHECK_THROWS_AS(Job(spec_for(algorithms::cc_program(), dir.path(), 0)), ValidationError);
  CHECK_THROWS_AS(algorithms::pagerank_program(0, 0.85), ValidationError);
  Job job(spec_for(algorithms::sssp_program(1), dir.path(), 1));
  CHECK_THROWS_AS(job.load({vtx(1, {{2, -1.0}})}), ValidationError);
  CHECK_THROWS_AS(job.load({vtx(1, {}), vtx(1, {})}), DuplicateKeyError);
}

TEST_CASE("mutations: delete before insert, default resolve") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    if (in.gs.superstep == 1 && out.vertex.vid == 1) {
      out.add_vertex({5, true, "new", {}});
      out.remove_vertex(5);
      out.remove_vertex(2);
    }
    out.vote_to_halt();
  };
  for (auto join : {JoinStrategy::FullOuter, JoinStrategy::LeftOuter}) {
    PlanConfig cfg;
    cfg.join = join;
    auto r = test::run_program(p, {vtx(1, {}), vtx(2, {}), vtx(5, {})}, cfg, 2, dir / to_string(join));
    REQUIRE(r.vertices.size() == 2);
    CHECK(r.vertices[1].vid == 5);
    CHECK(r.vertices[1].value == "new");
    CHECK(r.report.vertices == 2);
  }
  Mutation a = Mutation::insert({9, false, "a", {}}), b = Mutation::insert({9, false, "b", {}});
  std::vector<Mutation> group{a, Mutation::remove(9), b};
  auto eff = default_resolve(group);
  REQUIRE(eff.size() == 2);
  CHECK(eff[0].kind == MutationKind::Delete);
  CHECK(eff[1].vertex.value == "b");
}

TEST_CASE("an inserted active vertex keeps the job running") {
  TempDir dir("rt");
  UserProgram p;
  p.compute = [](const ComputeInput& in, ComputeOutput& out) {
    if (in.gs.superstep == 1) out.add_vertex({2, false, {}, {}});
    out.vertex.value += "x";
    out.vote_to_halt();
  };
  auto r = test::run_program(p, {vtx(1, {})}, {}, 1, dir.path());
  REQUIRE(r.vertices.size() == 2);
  CHECK(r.vertices[1].value == "x");
  CHECK(r.report.supersteps == 2);
}

TEST_CASE("two-stage aggregation equals a single fold") {
  AggregateFn sum = [](std::span<const Blob> xs) {
    std::uint64_t s = 0;
    for (auto& x : xs) s += decode_u64(x);
    return encode_u64(s);
  };
  CHECK(decode_u64(*two_stage_aggregate({{encode_u64(1), encode_u64(2)}, {encode_u64(3)}}, sum)) == 6);
  CHECK_FALSE(two_stage_aggregate({{}, {}}, sum).has_value());
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<Blob>> parts(rng() % 5 + 1);
    std::uint64_t total = 0;
    for (auto& p : parts) {
      for (int i = 0, n = static_cast<int>(rng() % 6); i < n; ++i) {
        auto x = rng() % 1000;
        total += x;
        p.push_back(encode_u64(x));
      }
    }
    auto got = two_stage_aggregate(parts, sum);
    if (got) CHECK(decode_u64(*got) == total);
  }
  CHECK(evaluate_termination(true, 0));
  CHECK_FALSE(evaluate_termination(true, 3));
  CHECK_FALSE(evaluate_termination(false, 0));
}

TEST_CASE("the sixteen plans are distinct and sticky") {
  auto pmap = PartitionMap::round_robin(4, {0, 1});
  std::set<std::string> sigs;
  for (const auto& cfg : all_plan_configs()) {
    auto plan = generate_plan(cfg, pmap);
    CHECK_NOTHROW(plan.check_sticky());
    sigs.insert(plan.signature());
  }
  CHECK(sigs.size() == 16);
}

TEST_CASE("gs history is written every superstep") {
  TempDir dir("rt");
  Job job(spec_for(algorithms::sssp_program(1), dir.path(), 1));
  job.load(g1());
  job.run();
  for (std::uint64_t s = 1; s <= job.gs().superstep; ++s) {
    CHECK(read_gs(gs_history_path(dir.path(), s)).superstep == s);
  }
  CHECK(read_gs(dir / "gs.json") == job.gs());
  CHECK(job.gs().halt);
}
