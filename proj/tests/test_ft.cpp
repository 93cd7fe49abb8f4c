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

#include <fstream>

#include "dfp/algorithms/algorithms.hpp"
#include "dfp/ft/checkpoint.hpp"
#include "oracles.hpp"

using namespace dfp;
using dfp::test::TempDir;

namespace {

io::SimpleGraph graph(std::uint64_t seed, std::uint64_t n = 300) {
  io::GenOptions o;
  o.vertices = n;
  o.avg_degree = 3;
  o.seed = seed;
  o.undirected = true;
  return io::gen_graph(o);
}

}  // namespace

TEST_CASE("failure injector fires once per event") {
  ft::FailureInjector inj;
  inj.fail_worker_at(1, 3);
  inj.fail_checkpoint_at(2);
  CHECK_NOTHROW(inj.on_superstep_start(0, 3));
  CHECK_NOTHROW(inj.on_superstep_start(1, 2));
  try {
    inj.on_superstep_start(1, 3);
    FAIL("expected an interruption");
  } catch (const InterruptionError& e) {
    CHECK(e.worker == 1);
  }
  CHECK_NOTHROW(inj.on_superstep_start(1, 3));
  CHECK(inj.take_checkpoint_failure(2));
  CHECK_FALSE(inj.take_checkpoint_failure(2));
  CHECK(inj.fired() == 2);
}

TEST_CASE("recovery reproduces the failure-free run") {
  TempDir dir("ft");
  for (std::uint64_t every : {1, 2, 5}) {
    for (auto join : {JoinStrategy::FullOuter, JoinStrategy::LeftOuter}) {
      CAPTURE(every);
      CAPTURE(to_string(join));
      auto g = graph(every + 7);
      auto program = algorithms::sssp_program(1);
      PlanConfig cfg;
      cfg.join = join;
      auto clean = test::run_program(program, io::to_vertices(g, program), cfg, 4, dir / "clean", 4);
      REQUIRE(clean.report.ok());
      REQUIRE(clean.report.supersteps > every + 1);
      ft::FailureInjector inj;
      inj.fail_worker_at(2, every + 2);
      auto failed = test::run_program(program, io::to_vertices(g, program), cfg, 4, dir / "failed", 4, {}, &inj, every);
      REQUIRE(failed.report.ok());
      CHECK(failed.report.recoveries == 1);
      CHECK(failed.report.blacklisted == std::vector<int>{2});
      CHECK(failed.vertices == clean.vertices);
      CHECK(failed.report.supersteps == clean.report.supersteps);
      CHECK(failed.report.final_gs == clean.report.final_gs);
      std::filesystem::remove_all(dir / "clean");
      std::filesystem::remove_all(dir / "failed");
    }
  }
}

TEST_CASE("a new job ignores checkpoints left in its directory") {
  TempDir dir("ft");
  auto program = algorithms::sssp_program(1);
  auto first = graph(21);
  auto second = graph(22);
  auto old = test::run_program(program, io::to_vertices(first, program), {}, 4, dir.path(), 4, {}, nullptr, 1);
  REQUIRE(old.report.ok());
  REQUIRE(ft::latest_sealed_checkpoint(dir / "ckpt").has_value());

  auto clean = test::run_program(program, io::to_vertices(second, program), {}, 4, dir / "clean", 4);
  ft::FailureInjector inj;
  inj.fail_worker_at(1, 2);
  auto r = test::run_program(program, io::to_vertices(second, program), {}, 4, dir.path(), 4, {}, &inj, 5);
  CHECK(r.report.termination == runtime::Termination::Failed);
  CHECK(r.report.error.find("no checkpoint") != std::string::npos);
  CHECK(clean.report.ok());
}

TEST_CASE("pagerank aggregates survive recovery") {
  TempDir dir("ft");
  auto g = graph(3, 200);
  auto program = algorithms::pagerank_program(8, 0.85);
  auto clean = test::run_program(program, io::to_vertices(g, program), {}, 4, dir / "clean", 4);
  ft::FailureInjector inj;
  inj.fail_worker_at(0, 6);
  auto failed = test::run_program(program, io::to_vertices(g, program), {}, 4, dir / "failed", 4, {}, &inj, 2);
  REQUIRE(failed.report.ok());
  REQUIRE(failed.vertices.size() == clean.vertices.size());
  for (std::size_t i = 0; i < clean.vertices.size(); ++i) {
    CHECK(test::close_rel(decode_f64(failed.vertices[i].value), decode_f64(clean.vertices[i].value), 1e-9));
  }
}

TEST_CASE("failure before the first checkpoint fails cleanly") {
  TempDir dir("ft");
  auto g = graph(4);
  auto program = algorithms::sssp_program(1);
  ft::FailureInjector inj;
  inj.fail_worker_at(1, 2);
  auto r = test::run_program(program, io::to_vertices(g, program), {}, 4, dir.path(), 4, {}, &inj, 5);
  CHECK(r.report.termination == runtime::Termination::Failed);
  CHECK(r.report.error.find("no checkpoint") != std::string::npos);
}

TEST_CASE("an interrupted checkpoint is never used") {
  TempDir dir("ft");
  auto g = graph(5);
  auto program = algorithms::cc_program();
  auto clean = test::run_program(program, io::to_vertices(g, program), {}, 4, dir / "clean", 4);
  ft::FailureInjector inj;
  inj.fail_checkpoint_at(4);
  inj.fail_worker_at(3, 5);
  auto r = test::run_program(program, io::to_vertices(g, program), {}, 4, dir / "failed", 4, {}, &inj, 2);
  REQUIRE(r.report.ok());
  CHECK(r.vertices == clean.vertices);

  // With the only checkpoint interrupted there is nothing to recover from.
  ft::FailureInjector only;
  only.fail_checkpoint_at(2);
  only.fail_worker_at(1, 3);
  auto lost = test::run_program(program, io::to_vertices(g, program), {}, 4, dir / "lost", 4, {}, &only, 2);
  CHECK(lost.report.termination == runtime::Termination::Failed);
  CHECK(lost.report.error.find("no checkpoint") != std::string::npos);
}

TEST_CASE("checkpoints are sealed, verified and pruned") {
  TempDir dir("ft");
  auto g = graph(6, 500);
  auto program = algorithms::sssp_program(1);
  JobSpec spec;
  spec.program = program;
  spec.work_dir = (dir / "w").string();
  spec.num_partitions = 3;
  spec.num_workers = 3;
  spec.plan.join = JoinStrategy::LeftOuter;
  runtime::Job job(spec);
  job.load(io::to_vertices(g, program));
  job.step();
  job.step();
  auto root = dir / "ck";
  auto info = ft::write_checkpoint(job.state(), root, 2);
  CHECK(ft::verify_checkpoint(info.dir));
  CHECK(std::filesystem::exists(info.dir / "COMMITTED"));
  job.step();
  ft::write_checkpoint(job.state(), root, 3);
  job.step();
  ft::write_checkpoint(job.state(), root, 4);
  ft::prune_checkpoints(root, 2);
  CHECK_FALSE(std::filesystem::exists(ft::checkpoint_dir(root, 2)));
  auto latest = ft::latest_sealed_checkpoint(root);
  REQUIRE(latest);
  CHECK(latest->superstep == 4);

  // A corrupted file makes the newest checkpoint unusable; the older one is chosen.
  {
    std::ofstream f(latest->dir / "vertex-0.dat", std::ios::app | std::ios::binary);
    f << "junk";
  }
  std::string why;
  CHECK_FALSE(ft::verify_checkpoint(latest->dir, &why));
  CHECK(why.find("hash") != std::string::npos);
  CHECK(ft::latest_sealed_checkpoint(root)->superstep == 3);
}

TEST_CASE("recovery onto a different partition count") {
  TempDir dir("ft");
  auto g = graph(8, 400);
  auto program = algorithms::sssp_program(1);
  PlanConfig cfg;
  cfg.join = JoinStrategy::LeftOuter;
  auto clean = test::run_program(program, io::to_vertices(g, program), cfg, 3, dir / "clean");

  JobSpec spec;
  spec.program = program;
  spec.work_dir = (dir / "a").string();
  spec.num_partitions = 3;
  spec.num_workers = 3;
  spec.plan = cfg;
  runtime::Job first(spec);
  first.load(io::to_vertices(g, program));
  first.step();
  first.step();
  auto info = ft::write_checkpoint(first.state(), dir / "ck", 2);

  spec.work_dir = (dir / "b").string();
  spec.num_partitions = 5;
  spec.num_workers = 2;
  runtime::Job second(spec);
  // The GS history is durable outside the checkpoint; the new job sees the same copy.
  std::filesystem::copy(dir / "a" / "gs", dir / "b" / "gs", std::filesystem::copy_options::recursive | std::filesystem::copy_options::overwrite_existing);
  second.restore(info);
  CHECK(second.gs().superstep == 3);
  CHECK(second.state().total_vertices() == g.vertices());
  while (!second.step()) {
  }
  CHECK(second.vertices() == clean.vertices);
}

TEST_CASE("sha256 of a known string") {
  TempDir dir("ft");
  {
    std::ofstream f(dir / "abc", std::ios::binary);
    f << "abc";
  }
  CHECK(ft::sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
