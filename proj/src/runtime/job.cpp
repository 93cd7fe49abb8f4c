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

#include "dfp/runtime/job.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <thread>

#include "dfp/dataflow/join.hpp"
#include "dfp/ft/checkpoint.hpp"
#include "dfp/io/graph_io.hpp"
#include "dfp/runtime/global_state.hpp"

namespace dfp::runtime {

using dataflow::Exchange;
using dataflow::JoinedTuple;
using dataflow::Source;

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Running:
      return "running";
    case Termination::Halted:
      return "halted";
    case Termination::MaxSupersteps:
      return "max-supersteps";
    case Termination::Failed:
      return "failed";
  }
  return "?";
}

std::vector<Mutation> default_resolve(std::span<const Mutation> group) {
  std::vector<Mutation> out;
  const Mutation* best = nullptr;
  std::string best_rec;
  for (const auto& m : group) {
    if (m.kind == MutationKind::Delete) {
      if (out.empty()) out.push_back(m);
      continue;
    }
    auto rec = encode_vertex_record(m.vertex);
    if (!best || rec > best_rec) {
      best = &m;
      best_rec = std::move(rec);
    }
  }
  if (best) out.push_back(*best);
  return out;
}

struct Job::PartitionResult {
  bool halt_and = true;
  bool inserted_active = false;
  std::uint64_t live = 0;
  std::uint64_t messages = 0;
  std::uint64_t combined = 0;
  std::uint64_t created = 0;
  std::vector<Blob> aggregates;
  /// Vids of vertices left active by compute (left outer plans), vid-ascending.
  std::filesystem::path active_run;
  /// Vid -> active after the mutations of this superstep; nullopt when deleted.
  std::map<VertexId, std::optional<bool>> mutated;
};

class Job::ErrorSlot {
 public:
  void set(std::exception_ptr e) {
    bool closed = false;
    try {
      std::rethrow_exception(e);
    } catch (const ChannelClosed&) {
      closed = true;
    } catch (...) {
    }
    std::lock_guard lock(mu_);
    if (!first_ || (first_closed_ && !closed)) {
      first_ = e;
      first_closed_ = closed;
    }
  }
  bool has() const {
    std::lock_guard lock(mu_);
    return static_cast<bool>(first_);
  }
  void rethrow() {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  mutable std::mutex mu_;
  std::exception_ptr first_;
  bool first_closed_ = false;
};

namespace {

/// Msg_s of one partition as a stream.
class MsgFileSource final : public Source<MsgTuple> {
 public:
  MsgFileSource(const storage::Layout& layout, int p, std::uint64_t s) {
    auto path = layout.msg_path(p, s);
    if (std::filesystem::exists(path)) {
      reader_.emplace(path);
    } else if (s != 1) {
      throw IoError("missing message file " + path.string());
    }
  }
  bool next(MsgTuple& out) override { return reader_ && reader_->next(out); }

 private:
  std::optional<storage::MsgFileReader> reader_;
};

/// The Vid index as a stream of (vid, NULL).
class VidSource final : public Source<MsgTuple> {
 public:
  explicit VidSource(storage::BTree* vid) {
    if (vid) cursor_ = vid->scan();
  }
  bool next(MsgTuple& out) override {
    if (!cursor_ || !cursor_->next(rec_)) return false;
    out.vid = rec_.key;
    out.payload.reset();
    return true;
  }

 private:
  std::unique_ptr<storage::IndexCursor> cursor_;
  storage::IndexRecord rec_;
};

constexpr std::size_t kAggregateFoldThreshold = 1024;

}  // namespace

Job::Job(JobSpec spec, ft::FailureInjector* injector)
    : spec_(std::move(spec)), injector_(injector), combiner_(dataflow::Combiner::for_program(spec_.program)) {
  auto problems = validate_job(spec_);
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ValidationError(msg);
  }
  spec_.plan = canonical(spec_.plan);
  if (spec_.work_dir.empty()) throw ValidationError("work directory not set");
  if (spec_.checkpoint_dir.empty()) spec_.checkpoint_dir = (std::filesystem::path(spec_.work_dir) / "ckpt").string();
  std::vector<int> workers;
  for (int w = 0; w < spec_.num_workers; ++w) workers.push_back(w);
  auto pmap = PartitionMap::round_robin(spec_.num_partitions, workers);
  plan_ = generate_plan(spec_.plan, pmap);
  state_ = std::make_unique<EngineState>(spec_.work_dir, spec_.plan, spec_.memory, pmap);
}

Job::~Job() = default;

void Job::load(std::vector<VertexTuple> vertices) {
  std::sort(vertices.begin(), vertices.end(), [](const auto& a, const auto& b) { return a.vid < b.vid; });
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i].vid == vertices[i - 1].vid) {
      throw DuplicateKeyError("duplicate vertex id " + std::to_string(vertices[i].vid));
    }
  }
  const int n = state_->num_partitions();
  std::vector<std::vector<VertexTuple>> parts(static_cast<std::size_t>(n));
  for (auto& v : vertices) {
    if (spec_.program.validate_vertex) {
      if (auto err = spec_.program.validate_vertex(v)) throw ValidationError("vertex " + std::to_string(v.vid) + ": " + *err);
    }
    parts[static_cast<std::size_t>(dataflow::partition_fn(v.vid, n))].push_back(std::move(v));
  }
  for (int p = 0; p < n; ++p) {
    auto& ps = state_->parts[static_cast<std::size_t>(p)];
    ps.vertex->bulk_load(parts[static_cast<std::size_t>(p)]);
    ps.vertex_count = parts[static_cast<std::size_t>(p)].size();
  }
  finish_load();
}

void Job::load_input() {
  io::load_graph(spec_.input_path, *state_, spec_.program);
  finish_load();
}

void Job::finish_load() {
  auto& st = *state_;
  if (st.plan.join == JoinStrategy::LeftOuter) {
    for (int p = 0; p < st.num_partitions(); ++p) {
      auto& ps = st.parts[static_cast<std::size_t>(p)];
      auto vid = st.create_vid_index(p, 1);
      auto loader = vid->bulk_loader();
      auto scan = ps.vertex->scan();
      VertexTuple v;
      while (scan.next(v))
        if (!v.halt) loader.add(v.vid, {});
      loader.finish();
      ps.vid = std::move(vid);
    }
  }
  // Checkpoints left by an earlier job in the same directory belong to another graph.
  ft::prune_checkpoints(spec_.checkpoint_dir, 0);
  st.gs = GlobalState{false, {}, 1};
  write_gs(st.layout.root(), st.gs);
  loaded_ = true;
}

void Job::restore(const ft::CheckpointInfo& ckpt) {
  ft::recover(*state_, ckpt, state_->pmap);
  stats_.clear();
  termination_ = Termination::Running;
  loaded_ = true;
}

void Job::compute_partition(int p, std::uint64_t s, Exchange<MsgTuple>::Sender& msg_out,
                            Exchange<Mutation>::Sender& mut_out, PartitionResult& r) {
  auto& st = *state_;
  auto& ps = st.parts[static_cast<std::size_t>(p)];
  const int n = st.num_partitions();
  const auto& program = spec_.program;
  MsgFileSource msgs(st.layout, p, s);
  auto sender_gb = dataflow::make_group_by(st.plan.sender_group_by(), combiner_, dataflow::Stage::Raw,
                                           {st.memory.group_by_bytes, st.layout.tmp_dir(p), &counters_});
  std::optional<storage::MsgFileWriter> active;
  if (st.plan.join == JoinStrategy::LeftOuter) {
    r.active_run = st.layout.temp_file(p, "active");
    active.emplace(r.active_run, storage::MsgFileWriter::Order::StrictlyAscending, 64 << 10);
  }

  auto process = [&](JoinedTuple& row) {
    // The σ filter: halted vertices without messages are not computed.
    if (!row.payload && !(row.vertex && !row.vertex->halt)) return;
    if (dataflow::partition_fn(row.vid, n) != p) {
      throw ContractViolation("vid " + std::to_string(row.vid) + " reached partition " + std::to_string(p) +
                              " but is owned by partition " + std::to_string(dataflow::partition_fn(row.vid, n)));
    }
    std::vector<Blob> inbox;
    if (row.payload) inbox = combiner_.unpack(*row.payload);
    const bool present = row.vertex.has_value();
    ComputeOutput out;
    out.vertex = present ? *row.vertex : VertexTuple{row.vid, false, {}, {}};
    ComputeInput in{present, inbox, st.gs};
    try {
      program.compute(in, out);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ApplicationError("compute failed for vid " + std::to_string(row.vid) + " in partition " +
                             std::to_string(p) + " at superstep " + std::to_string(s) + ": " + e.what());
    }
    if (out.vertex.vid != row.vid) {
      throw ApplicationError("compute changed the vid of vertex " + std::to_string(row.vid));
    }
    // D2
    if (!present) {
      ps.vertex->upsert(out.vertex);
      ++r.created;
    } else if (!(out.vertex == *row.vertex)) {
      ps.vertex->upsert(out.vertex);
    }
    // D4
    r.halt_and = r.halt_and && halt_contribution(out.vertex, out.messages);
    // D3
    for (auto& m : out.messages) {
      if (!m.payload) throw ApplicationError("compute of vid " + std::to_string(row.vid) + " sent a NULL payload");
      sender_gb->add(std::move(m));
      ++r.messages;
    }
    // D5
    if (!out.aggregates.empty()) {
      if (!program.aggregate) throw ApplicationError("aggregate contribution without an aggregate function");
      for (auto& a : out.aggregates) r.aggregates.push_back(std::move(a));
      if (r.aggregates.size() >= kAggregateFoldThreshold) r.aggregates = {(*program.aggregate)(r.aggregates)};
    }
    // D6
    for (const auto& m : out.mutations) mut_out.send(m);
    // D11
    if (!out.vertex.halt) {
      ++r.live;
      if (active) active->write_raw(row.vid, nullptr);
    }
  };

  JoinedTuple row;
  if (st.plan.join == JoinStrategy::FullOuter) {
    dataflow::FullOuterJoin join(msgs, *ps.vertex);
    while (join.next(row)) process(row);
  } else {
    VidSource vids(ps.vid.get());
    dataflow::MergeMsgVid merged(msgs, vids);
    dataflow::LeftOuterJoin join(merged, *ps.vertex);
    while (join.next(row)) process(row);
  }
  if (active) active->close();
  if (!r.aggregates.empty() && r.aggregates.size() > 1) r.aggregates = {(*program.aggregate)(r.aggregates)};

  sender_gb->finish();
  MsgTuple t;
  while (sender_gb->next(t)) msg_out.send(t);
  msg_out.finish();
  mut_out.finish();
}

void Job::receive_messages(int p, std::uint64_t s, Source<MsgTuple>& in, PartitionResult& r) {
  auto& st = *state_;
  storage::MsgFileWriter out(st.layout.msg_path(p, s + 1), storage::MsgFileWriter::Order::StrictlyAscending);
  MsgTuple t;
  if (st.plan.receiver_group_by() == GroupByStrategy::Preclustered) {
    dataflow::PreclusteredGroupBy gb(in, combiner_, dataflow::Stage::Partial);
    while (gb.next(t)) out.write(t);
  } else {
    auto gb = dataflow::make_group_by(st.plan.receiver_group_by(), combiner_, dataflow::Stage::Partial,
                                      {st.memory.group_by_bytes, st.layout.tmp_dir(p), &counters_});
    while (in.next(t)) gb->add(std::move(t));
    gb->finish();
    while (gb->next(t)) out.write(t);
  }
  out.close();
  r.combined = out.count();
}

void Job::apply_mutations(int p, std::vector<Mutation>& muts, PartitionResult& r) {
  if (muts.empty()) return;
  auto& ps = state_->parts[static_cast<std::size_t>(p)];
  // Arrival order across producers is not deterministic; resolve sees a canonical order.
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(muts.size());
  for (std::size_t i = 0; i < muts.size(); ++i) {
    std::string k;
    bytes::append_u64_be(k, muts[i].vertex.vid);
    k.push_back(muts[i].kind == MutationKind::Delete ? 0 : 1);
    if (muts[i].kind == MutationKind::Insert) k += encode_vertex_record(muts[i].vertex);
    keys.emplace_back(std::move(k), i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<Mutation> sorted;
  sorted.reserve(muts.size());
  for (auto& [k, i] : keys) sorted.push_back(std::move(muts[i]));
  muts.clear();

  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    const VertexId vid = sorted[i].vertex.vid;
    while (j < sorted.size() && sorted[j].vertex.vid == vid) ++j;
    std::span<const Mutation> group(sorted.data() + i, j - i);
    std::vector<Mutation> effective;
    try {
      effective = spec_.program.resolve ? (*spec_.program.resolve)(group) : default_resolve(group);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ApplicationError("resolve failed for vid " + std::to_string(vid) + ": " + e.what());
    }
    std::stable_partition(effective.begin(), effective.end(),
                          [](const Mutation& m) { return m.kind == MutationKind::Delete; });
    bool exists = ps.vertex->lookup(vid).has_value();
    std::optional<bool> final_active;
    bool touched = false;
    for (const auto& m : effective) {
      if (m.vertex.vid != vid) {
        throw ApplicationError("resolve for vid " + std::to_string(vid) + " returned a mutation of vid " +
                               std::to_string(m.vertex.vid));
      }
      touched = true;
      if (m.kind == MutationKind::Delete) {
        if (exists) {
          ps.vertex->erase(vid);
          --ps.vertex_count;
          exists = false;
        }
        final_active.reset();
      } else {
        if (spec_.program.validate_vertex) {
          if (auto err = spec_.program.validate_vertex(m.vertex)) throw ApplicationError("inserted vertex " + std::to_string(vid) + ": " + *err);
        }
        ps.vertex->upsert(m.vertex);
        if (!exists) ++ps.vertex_count;
        exists = true;
        final_active = !m.vertex.halt;
        if (!m.vertex.halt) r.inserted_active = true;
      }
    }
    if (touched) r.mutated[vid] = final_active;
    i = j;
  }
}

void Job::rebuild_vid(int p, std::uint64_t s, PartitionResult& r) {
  auto& st = *state_;
  auto& ps = st.parts[static_cast<std::size_t>(p)];
  auto next = st.create_vid_index(p, s + 1);
  {
    auto loader = next->bulk_loader();
    storage::MsgFileReader active(r.active_run, 64 << 10);
    MsgTuple t;
    bool have = active.next(t);
    auto it = r.mutated.begin();
    while (have || it != r.mutated.end()) {
      if (it == r.mutated.end() || (have && t.vid < it->first)) {
        loader.add(t.vid, {});
        have = active.next(t);
        continue;
      }
      if (have && t.vid == it->first) have = active.next(t);
      if (it->second.value_or(false)) loader.add(it->first, {});
      ++it;
    }
    loader.finish();
  }
  std::error_code ec;
  std::filesystem::remove(r.active_run, ec);
  if (ps.vid) ps.vid->destroy();
  ps.vid = std::move(next);
}

bool Job::step() {
  if (!loaded_) throw ContractViolation("step() before the graph was loaded");
  if (terminated()) return true;
  auto& st = *state_;
  const std::uint64_t s = st.gs.superstep;
  const int n = st.num_partitions();
  const auto t0 = std::chrono::steady_clock::now();
  counters_.reset();
  const auto leaf0 = st.vertex_leaf_reads();
  const auto wb0 = st.cache->counters().write_back_bytes;
  plan_ = generate_plan(st.plan, st.pmap);

  std::vector<PartitionResult> results(static_cast<std::size_t>(n));
  std::vector<std::vector<Mutation>> mutations(static_cast<std::size_t>(n));
  {
    dataflow::ChannelOptions copts{st.memory.channel_capacity_batches, st.memory.channel_batch_bytes,
                                   st.layout.root() / "xchg"};
    Exchange<MsgTuple> msgs(n, n, st.plan.connector, copts, &counters_);
    Exchange<Mutation> muts(n, n, ConnectorKind::PartitionPipelined, copts, &counters_);
    ErrorSlot errors;
    auto guarded = [&](auto&& fn) {
      try {
        fn();
      } catch (...) {
        errors.set(std::current_exception());
        msgs.abort();
        muts.abort();
      }
    };
    std::vector<std::thread> threads;
    for (int p = 0; p < n; ++p) {
      threads.emplace_back([&, p] {
        guarded([&] { receive_messages(p, s, msgs.receiver(p), results[static_cast<std::size_t>(p)]); });
      });
      threads.emplace_back([&, p] {
        guarded([&] { mutations[static_cast<std::size_t>(p)] = dataflow::drain(muts.receiver(p)); });
      });
    }
    for (int w : st.pmap.workers()) {
      threads.emplace_back([&, w] {
        guarded([&] {
          if (injector_) injector_->on_superstep_start(w, s);
          for (int p : st.pmap.partitions_of(w)) {
            compute_partition(p, s, msgs.sender(p), muts.sender(p), results[static_cast<std::size_t>(p)]);
          }
        });
      });
    }
    for (auto& t : threads) t.join();
    guarded([&] { msgs.join(); });
    errors.rethrow();
  }

  // Barrier reached: apply D6, rebuild Vid, maintain the indexes.
  bool halt_and = true;
  std::uint64_t messages = 0, combined = 0, live = 0;
  std::vector<std::vector<Blob>> aggregates;
  for (int p = 0; p < n; ++p) {
    auto& r = results[static_cast<std::size_t>(p)];
    auto& ps = st.parts[static_cast<std::size_t>(p)];
    ps.vertex_count += r.created;
    apply_mutations(p, mutations[static_cast<std::size_t>(p)], r);
    if (st.plan.join == JoinStrategy::LeftOuter) rebuild_vid(p, s, r);
    if (auto* lsm = ps.vertex->lsm(); lsm && lsm->disk_components() >= 4) ps.vertex->lsm_merge();
    std::error_code ec;
    std::filesystem::remove(st.layout.msg_path(p, s), ec);
    halt_and = halt_and && r.halt_and && !r.inserted_active;
    messages += r.messages;
    combined += r.combined;
    live += r.live;
    aggregates.push_back(std::move(r.aggregates));
  }

  GlobalState next{false, {}, s + 1};
  if (spec_.program.aggregate) {
    if (auto agg = two_stage_aggregate(aggregates, *spec_.program.aggregate)) next.aggregate = std::move(*agg);
  }
  next.halt = evaluate_termination(halt_and, combined);
  st.gs = next;
  write_gs(st.layout.root(), st.gs);

  SuperstepStats row;
  row.superstep = s;
  row.live_vertices = live;
  row.total_vertices = st.total_vertices();
  row.messages = messages;
  row.combined_messages = combined;
  row.leaf_reads = st.vertex_leaf_reads() - leaf0;
  row.spill_bytes = counters_.spill_bytes.load() + (st.cache->counters().write_back_bytes - wb0);
  row.channel_bytes = counters_.channel_bytes.load();
  row.wall_millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  while (!stats_.empty() && stats_.back().superstep >= s) stats_.pop_back();
  stats_.push_back(row);

  if (next.halt) {
    termination_ = Termination::Halted;
  } else if (s >= spec_.max_supersteps) {
    termination_ = Termination::MaxSupersteps;
  }
  return terminated();
}

void Job::take_checkpoint(std::uint64_t s, JobReport& report) {
  try {
    ft::write_checkpoint(*state_, spec_.checkpoint_dir, s, injector_);
    ft::prune_checkpoints(spec_.checkpoint_dir, 2);
    ++report.checkpoints;
  } catch (const IoError&) {
    // The unsealed checkpoint stays invisible to recovery; the job goes on.
    std::error_code ec;
    std::filesystem::remove_all(ft::checkpoint_dir(spec_.checkpoint_dir, s), ec);
  }
}

void Job::recover(const InterruptionError* failure, const std::string& why) {
  if (failure && failure->worker >= 0) blacklist_.add(failure->worker);
  auto ckpt = ft::latest_sealed_checkpoint(spec_.checkpoint_dir);
  if (!ckpt) throw ApplicationError("recovery impossible: no checkpoint (" + why + ")");
  std::vector<int> alive;
  for (int w : state_->pmap.workers())
    if (!blacklist_.contains(w)) alive.push_back(w);
  if (alive.empty()) throw ApplicationError("recovery impossible: every worker is blacklisted (" + why + ")");
  auto pmap = PartitionMap::round_robin(state_->num_partitions(), alive);
  ft::recover(*state_, *ckpt, pmap);
  plan_ = generate_plan(state_->plan, pmap);
  while (!stats_.empty() && stats_.back().superstep > ckpt->superstep) stats_.pop_back();
  termination_ = Termination::Running;
  ++recoveries_;
}

JobReport Job::run() {
  JobReport report;
  const int max_recoveries = std::max(3, spec_.num_workers);
  for (;;) {
    try {
      while (!terminated()) {
        step();
        const auto done = state_->gs.superstep - 1;
        if (spec_.checkpoint_every > 0 && !terminated() && done % spec_.checkpoint_every == 0) {
          take_checkpoint(done, report);
        }
      }
      break;
    } catch (const InterruptionError& e) {
      if (recoveries_ >= max_recoveries) {
        report.termination = Termination::Failed;
        report.error = std::string("giving up after ") + std::to_string(recoveries_) + " recoveries: " + e.what();
        break;
      }
      try {
        recover(&e, e.what());
      } catch (const std::exception& re) {
        report.termination = Termination::Failed;
        report.error = re.what();
        break;
      }
    } catch (const IoError& e) {
      if (recoveries_ >= max_recoveries) {
        report.termination = Termination::Failed;
        report.error = e.what();
        break;
      }
      try {
        recover(nullptr, e.what());
      } catch (const std::exception& re) {
        report.termination = Termination::Failed;
        report.error = re.what();
        break;
      }
    } catch (const std::exception& e) {
      report.termination = Termination::Failed;
      report.error = e.what();
      break;
    }
  }
  if (report.termination != Termination::Failed) report.termination = termination_;
  report.final_gs = state_->gs;
  report.stats = stats_;
  report.supersteps = stats_.size();
  report.recoveries = recoveries_;
  report.blacklisted = blacklist_.ids();
  report.vertices = state_->total_vertices();
  termination_ = report.termination;
  return report;
}

std::vector<VertexTuple> Job::vertices() {
  std::vector<VertexTuple> out;
  for (auto& ps : state_->parts) {
    auto scan = ps.vertex->scan();
    VertexTuple v;
    while (scan.next(v)) out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.vid < b.vid; });
  return out;
}

void Job::dump(const std::filesystem::path& dir) { io::dump_result(*state_, spec_.program, dir); }

JobReport run_job(const JobSpec& spec, ft::FailureInjector* injector) {
  Job job(spec, injector);
  job.load_input();
  auto report = job.run();
  if (report.ok() && !spec.output_path.empty()) job.dump(spec.output_path);
  return report;
}

}  // namespace dfp::runtime
