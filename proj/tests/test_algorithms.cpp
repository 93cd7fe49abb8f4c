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

#include "dfp/algorithms/algorithms.hpp"
#include "oracles.hpp"

using namespace dfp;
using dfp::test::TempDir;

namespace {

io::SimpleGraph random_graph(std::uint64_t seed, std::uint64_t n, double deg, bool undirected = false) {
  io::GenOptions o;
  o.kind = seed % 2 ? io::GraphKind::Uniform : io::GraphKind::PowerLaw;
  o.vertices = n;
  o.avg_degree = deg;
  o.seed = seed;
  o.undirected = undirected;
  return io::gen_graph(o);
}

PlanConfig plan_no(std::size_t i) { return all_plan_configs()[i % 16]; }

}  // namespace

TEST_CASE("sssp matches dijkstra") {
  TempDir dir("alg");
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto g = random_graph(seed, 50 + seed * 13, 3);
    VertexId src = seed % g.vertices() + 1;
    auto program = algorithms::sssp_program(src);
    auto r = test::run_program(program, io::to_vertices(g, program), plan_no(seed), 1 + seed % 4,
                               dir / std::to_string(seed));
    REQUIRE(r.report.ok());
    auto expect = test::dijkstra(g, src);
    REQUIRE(r.vertices.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(decode_f64(r.vertices[i].value) == expect[i]);
  }
}

TEST_CASE("cc matches union-find") {
  TempDir dir("alg");
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto g = random_graph(seed, 60 + seed * 11, 1.2, true);
    auto program = algorithms::cc_program();
    auto r = test::run_program(program, io::to_vertices(g, program), plan_no(seed + 3), 1 + seed % 4,
                               dir / std::to_string(seed));
    REQUIRE(r.report.ok());
    auto expect = test::union_find_labels(g);
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(decode_u64(r.vertices[i].value) == expect[i]);
  }
}

TEST_CASE("cc on a path needs at most k supersteps of propagation") {
  TempDir dir("alg");
  io::GenOptions o;
  o.kind = io::GraphKind::Path;
  o.vertices = 12;
  o.undirected = true;
  auto g = io::gen_graph(o);
  auto program = algorithms::cc_program();
  auto r = test::run_program(program, io::to_vertices(g, program), {}, 3, dir.path());
  for (auto& v : r.vertices) CHECK(decode_u64(v.value) == 1);
  CHECK(r.report.supersteps <= 12 + 1);
}

TEST_CASE("pagerank matches dense power iteration") {
  TempDir dir("alg");
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto g = random_graph(seed, 30 + seed * 20, 2.5);
    const int iters = 20;
    auto program = algorithms::pagerank_program(iters, 0.85);
    auto r = test::run_program(program, io::to_vertices(g, program), plan_no(seed * 5), 1 + seed % 4,
                               dir / std::to_string(seed));
    REQUIRE(r.report.ok());
    auto expect = test::power_iteration(g, iters, 0.85);
    double sum = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      double got = decode_f64(r.vertices[i].value);
      sum += got;
      CHECK(std::fabs(got - expect[i]) < 1e-12);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("pagerank on a star") {
  TempDir dir("alg");
  io::SimpleGraph g;
  g.adj = {{{2, 0}, {3, 0}}, {{1, 0}}, {{1, 0}}};
  auto program = algorithms::pagerank_program(20, 0.85);
  auto r = test::run_program(program, io::to_vertices(g, program), {}, 2, dir.path());
  auto expect = test::power_iteration(g, 20, 0.85);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(decode_f64(r.vertices[i].value) - expect[i]) < 1e-12);
}

TEST_CASE("combiners are associative and commutative") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> real(0, 100);
  for (const auto& program : {algorithms::sssp_program(1), algorithms::pagerank_program(3, 0.85),
                              algorithms::cc_program()}) {
    CAPTURE(program.name);
    const auto& combine = *program.combine;
    for (int t = 0; t < 200; ++t) {
      std::vector<Blob> xs;
      for (int i = 0, n = 2 + static_cast<int>(rng() % 6); i < n; ++i) {
        // Integral values keep floating-point sums exact, so order must not matter.
        xs.push_back(program.name == "cc" ? encode_u64(rng() % 1000) : encode_f64(std::floor(real(rng))));
      }
      auto whole = combine(xs);
      auto shuffled = xs;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(combine(shuffled) == whole);
      std::size_t cut = 1 + rng() % (xs.size() - 1);
      std::vector<Blob> left(xs.begin(), xs.begin() + static_cast<long>(cut)),
          right(xs.begin() + static_cast<long>(cut), xs.end());
      std::vector<Blob> partials{combine(left), combine(right)};
      CHECK(combine(partials) == whole);
    }
  }
}

TEST_CASE("mutation scripts match the reference applier") {
  TempDir dir("alg");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::uint64_t n = 40;
    auto script = algorithms::random_mutation_script(seed, n, 4, 30);
    std::map<VertexId, std::uint64_t> initial;
    std::vector<VertexTuple> vs;
    for (VertexId v = 1; v <= n; v += 1 + seed % 2) {
      initial[v] = v * 10;
      vs.push_back({v, false, encode_u64(v * 10), {}});
    }
    auto expect = algorithms::apply_mutation_script(initial, script);
    auto r = test::run_program(algorithms::mutation_program(script), vs, plan_no(seed * 3), 1 + seed % 4,
                               dir / std::to_string(seed));
    REQUIRE(r.report.ok());
    std::map<VertexId, std::uint64_t> got;
    for (auto& v : r.vertices) got[v.vid] = decode_u64(v.value);
    CHECK(got == expect);
  }
}

TEST_CASE("delete then reinsert in one superstep keeps the insert") {
  algorithms::MutationScript script;
  script.steps[1] = {{1, MutationKind::Insert, 2, 77}, {3, MutationKind::Delete, 2, 0}};
  auto expect = algorithms::apply_mutation_script({{1, 0}, {2, 0}, {3, 0}}, script);
  CHECK(expect.at(2) == 77 + 2);
  TempDir dir("alg");
  auto r = test::run_program(algorithms::mutation_program(script),
                             {{1, false, encode_u64(0), {}}, {2, false, encode_u64(0), {}}, {3, false, encode_u64(0), {}}},
                             {}, 2, dir.path());
  REQUIRE(r.vertices.size() == 3);
  CHECK(decode_u64(r.vertices[1].value) == 77 + 2);
}

TEST_CASE("inserting k vertices grows the graph by k") {
  algorithms::MutationScript script;
  for (VertexId t = 100; t < 105; ++t) script.steps[1].push_back({1, MutationKind::Insert, t, t});
  TempDir dir("alg");
  runtime::Job job([&] {
    JobSpec s;
    s.program = algorithms::mutation_program(script);
    s.work_dir = dir.path().string();
    s.num_partitions = 3;
    s.num_workers = 3;
    return s;
  }());
  job.load({{1, false, encode_u64(0), {}}, {2, false, encode_u64(0), {}}});
  job.step();
  CHECK(job.state().total_vertices() == 7);
  CHECK(job.gs().superstep == 2);
}

TEST_CASE("program lookup by name") {
  algorithms::ProgramArgs a;
  CHECK(algorithms::program_by_name("sssp", a).name == "sssp");
  CHECK(algorithms::program_by_name("mutate-test", a).resolve.has_value());
  CHECK_THROWS_AS(algorithms::program_by_name("bfs", a), ValidationError);
}
