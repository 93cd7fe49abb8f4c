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

#include <random>
#include <set>

#include "dfp/api.hpp"

using namespace dfp;

TEST_CASE("default combine gathers payloads into a list") {
  std::vector<Blob> bag{"a", "", "ccc"};
  auto list = default_combine(bag);
  CHECK(decode_list(list) == bag);
  CHECK(decode_list(concat_lists(default_combine(std::vector<Blob>{"a"}), default_combine(std::vector<Blob>{"b"}))) ==
        std::vector<Blob>{"a", "b"});
  CHECK_THROWS_AS(default_combine(std::vector<Blob>{}), ContractViolation);
  CHECK_THROWS_AS(decode_list(Blob("\0\0", 2)), ContractViolation);
}

TEST_CASE("halt contribution") {
  VertexTuple halted{1, true, {}, {}}, active{1, false, {}, {}};
  std::vector<MsgTuple> none, one{{2, Blob("x")}};
  CHECK(halt_contribution(halted, none));
  CHECK_FALSE(halt_contribution(halted, one));
  CHECK_FALSE(halt_contribution(active, none));
}

TEST_CASE("plan legality and the sixteen configurations") {
  PlanConfig bad;
  bad.group_by = GroupByStrategy::Preclustered;
  CHECK(plan_violation(bad).has_value());
  bad.connector = ConnectorKind::PartitionMergeMaterialized;
  CHECK_FALSE(plan_violation(bad).has_value());
  CHECK(canonical(bad).group_by == GroupByStrategy::SortBased);
  CHECK(canonical(bad).receiver_group_by() == GroupByStrategy::Preclustered);

  auto all = all_plan_configs();
  CHECK(all.size() == 16);
  std::set<std::string> names;
  for (const auto& c : all) {
    CHECK_FALSE(plan_violation(c).has_value());
    CHECK(canonical(c) == c);
    names.insert(to_string(c));
  }
  CHECK(names.size() == 16);
}

TEST_CASE("flag spellings") {
  CHECK(parse_join("outer") == JoinStrategy::FullOuter);
  CHECK(parse_join("leftouter") == JoinStrategy::LeftOuter);
  CHECK(parse_group_by("sort") == GroupByStrategy::SortBased);
  CHECK(parse_group_by("hashsort") == GroupByStrategy::HashSort);
  CHECK(parse_group_by("preclustered") == GroupByStrategy::Preclustered);
  CHECK(parse_connector("pipelined") == ConnectorKind::PartitionPipelined);
  CHECK(parse_connector("merge") == ConnectorKind::PartitionMergeMaterialized);
  CHECK(parse_storage("btree") == StorageKind::BTree);
  CHECK(parse_storage("lsm") == StorageKind::Lsm);
  CHECK_FALSE(parse_join("inner").has_value());
}

TEST_CASE("validate_job") {
  JobSpec s;
  CHECK_FALSE(validate_job(s).empty());
  s.program.compute = [](const ComputeInput&, ComputeOutput&) {};
  CHECK(validate_job(s).empty());
  s.num_partitions = 0;
  CHECK(validate_job(s).size() == 1);
  s.num_partitions = 2;
  s.plan.group_by = GroupByStrategy::Preclustered;
  auto errs = validate_job(s);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("merg") != std::string::npos);
}

TEST_CASE("vertex records round trip") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    VertexTuple v{rng(), rng() % 2 == 0, Blob(rng() % 20, 'v'), {}};
    for (int e = 0, n = static_cast<int>(rng() % 5); e < n; ++e) v.edges.push_back({rng(), Blob(rng() % 9, 'e')});
    CHECK(decode_vertex_record(v.vid, encode_vertex_record(v)) == v);
  }
}

TEST_CASE("value codecs") {
  auto f = f64_codec();
  CHECK(decode_f64(f.parse("2.5")) == 2.5);
  CHECK(f.format(f.parse("inf")) == "inf");
  CHECK(f.format(encode_f64(0.1)) == "0.1");
  CHECK_THROWS_AS(f.parse("x"), ValidationError);
  auto u = u64_codec();
  CHECK(decode_u64(u.parse("18446744073709551615")) == ~std::uint64_t{0});
  CHECK_THROWS_AS(u.parse("-1"), ValidationError);
  CHECK(u.parse("").empty());
}
