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

#include "dfp/runtime/plan.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dfp::runtime {

PartitionMap PartitionMap::round_robin(int partitions, const std::vector<int>& workers) {
  if (partitions < 1) throw ValidationError("numPartitions must be >= 1");
  if (workers.empty()) throw ValidationError("no worker available");
  std::vector<int> owner(static_cast<std::size_t>(partitions));
  for (int p = 0; p < partitions; ++p) owner[static_cast<std::size_t>(p)] = workers[static_cast<std::size_t>(p) % workers.size()];
  return PartitionMap(std::move(owner));
}

std::vector<int> PartitionMap::partitions_of(int worker) const {
  std::vector<int> out;
  for (int p = 0; p < partitions(); ++p)
    if (owner(p) == worker) out.push_back(p);
  return out;
}

std::vector<int> PartitionMap::workers() const {
  std::set<int> s(owner_.begin(), owner_.end());
  return {s.begin(), s.end()};
}

std::string to_string(Flow f) {
  static const char* names[] = {"D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9", "D11", "D12"};
  return names[static_cast<int>(f)];
}

namespace {

std::string group_by_op(GroupByStrategy g) {
  switch (g) {
    case GroupByStrategy::SortBased:
      return "sort-group-by";
    case GroupByStrategy::HashSort:
      return "hashsort-group-by";
    case GroupByStrategy::Preclustered:
      return "preclustered-group-by";
  }
  return "?";
}

class Builder {
 public:
  explicit Builder(PhysicalPlan& p) : plan_(p) {}

  int add(std::string op, int partition) {
    int id = static_cast<int>(plan_.operators.size());
    int loc = partition < 0 ? -1 : plan_.pmap.owner(partition);
    plan_.operators.push_back({id, std::move(op), partition, loc});
    return id;
  }
  void edge(int from, int to, Flow f, std::string connector) {
    plan_.edges.push_back({from, to, f, std::move(connector)});
  }

 private:
  PhysicalPlan& plan_;
};

}  // namespace

PhysicalPlan generate_plan(const PlanConfig& cfg, const PartitionMap& pmap) {
  if (auto v = plan_violation(cfg)) throw ValidationError(*v);
  if (pmap.partitions() < 1) throw ValidationError("numPartitions must be >= 1");
  PhysicalPlan plan;
  plan.config = canonical(cfg);
  plan.pmap = pmap;
  const auto& c = plan.config;
  Builder b(plan);
  const int n = pmap.partitions();
  const std::string storage = c.storage == StorageKind::BTree ? "btree" : "lsm-btree";
  const std::string exchange = c.connector == ConnectorKind::PartitionPipelined
                                   ? "m-to-n pipelined"
                                   : "m-to-n merging (sender-materialized)";

  int gs_scan = b.add("gs-read", -1);
  int halt_agg = b.add("global-and-aggregate", -1);
  int udf_agg = b.add("global-aggregate", -1);
  int gs_write = b.add("gs-write", -1);
  b.edge(halt_agg, gs_write, Flow::D8, "local");
  b.edge(udf_agg, gs_write, Flow::D9, "local");

  std::vector<int> senders(static_cast<std::size_t>(n)), receivers(static_cast<std::size_t>(n)),
      mut_send(static_cast<std::size_t>(n)), mut_recv(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    int msg_scan = b.add("msg-file-scan", k);
    int join;
    if (c.join == JoinStrategy::FullOuter) {
      join = b.add("index-full-outer-join[" + storage + "]", k);
      b.edge(msg_scan, join, Flow::D1, "local");
    } else {
      int vid_scan = b.add("vid-index-scan", k);
      int merge = b.add("merge-msg-vid", k);
      join = b.add("index-left-outer-join[" + storage + "]", k);
      b.edge(msg_scan, merge, Flow::D1, "local");
      b.edge(vid_scan, merge, Flow::D1, "local");
      b.edge(merge, join, Flow::D1, "local");
    }
    int compute = b.add(c.join == JoinStrategy::FullOuter ? "select-halt-or-msg+compute" : "compute", k);
    b.edge(gs_scan, compute, Flow::D1, "broadcast");
    b.edge(join, compute, Flow::D1, "local");
    int update = b.add("vertex-index-update[" + storage + "]", k);
    b.edge(compute, update, Flow::D2, "local");
    int local_and = b.add("local-and", k);
    b.edge(compute, local_and, Flow::D4, "local");
    b.edge(local_and, halt_agg, Flow::D8, "m-to-1");
    int local_agg = b.add("local-aggregate", k);
    b.edge(compute, local_agg, Flow::D5, "local");
    b.edge(local_agg, udf_agg, Flow::D9, "m-to-1");
    senders[static_cast<std::size_t>(k)] = b.add(group_by_op(c.sender_group_by()), k);
    b.edge(compute, senders[static_cast<std::size_t>(k)], Flow::D3, "local");
    receivers[static_cast<std::size_t>(k)] = b.add(group_by_op(c.receiver_group_by()), k);
    int msg_write = b.add("msg-file-write", k);
    b.edge(receivers[static_cast<std::size_t>(k)], msg_write, Flow::D7, "local");
    mut_send[static_cast<std::size_t>(k)] = compute;
    mut_recv[static_cast<std::size_t>(k)] = b.add("resolve+index-insert-delete[" + storage + "]", k);
    if (c.join == JoinStrategy::LeftOuter) {
      int null_msg = b.add("null-msg", k);
      int vid_load = b.add("vid-index-bulk-load", k);
      b.edge(compute, null_msg, Flow::D11, "local");
      b.edge(null_msg, vid_load, Flow::D12, "local");
    }
  }
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < n; ++k) {
      b.edge(senders[static_cast<std::size_t>(p)], receivers[static_cast<std::size_t>(k)], Flow::D7, exchange);
      b.edge(mut_send[static_cast<std::size_t>(p)], mut_recv[static_cast<std::size_t>(k)], Flow::D6,
             "m-to-n pipelined");
    }
  }
  plan.check_sticky();
  return plan;
}

std::string PhysicalPlan::signature() const {
  std::ostringstream os;
  os << to_string(config) << "|";
  for (const auto& op : operators) os << op.op << "@" << op.partition << ";";
  for (const auto& e : edges) {
    os << operators[static_cast<std::size_t>(e.from)].op << "->" << operators[static_cast<std::size_t>(e.to)].op << ":"
       << to_string(e.flow) << ":" << e.connector << ";";
  }
  return os.str();
}

std::string PhysicalPlan::describe() const {
  std::ostringstream os;
  os << "plan " << to_string(config) << " over " << pmap.partitions() << " partition(s)\n";
  std::map<std::string, int> counts;
  for (const auto& op : operators) ++counts[op.op];
  for (const auto& [name, cnt] : counts) os << "  " << name << " x" << cnt << "\n";
  std::map<std::string, int> flows;
  for (const auto& e : edges) {
    ++flows[to_string(e.flow) + " " + operators[static_cast<std::size_t>(e.from)].op + " -> " +
            operators[static_cast<std::size_t>(e.to)].op + " (" + e.connector + ")"];
  }
  for (const auto& [name, cnt] : flows) os << "  " << name << " x" << cnt << "\n";
  return os.str();
}

void PhysicalPlan::check_sticky() const {
  for (const auto& op : operators) {
    if (op.partition >= 0 && op.location != pmap.owner(op.partition)) {
      throw ContractViolation("operator " + op.op + " of partition " + std::to_string(op.partition) +
                              " is not located at the partition's owner");
    }
  }
}

}  // namespace dfp::runtime
