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

#include <memory>
#include <string>
#include <vector>

#include "dfp/dataflow/channel.hpp"
#include "dfp/dataflow/group_by.hpp"
#include "dfp/ft/failure.hpp"
#include "dfp/runtime/plan.hpp"
#include "dfp/runtime/state.hpp"

namespace dfp::ft {
struct CheckpointInfo;
}

namespace dfp::runtime {

struct SuperstepStats {
  std::uint64_t superstep = 0;
  std::uint64_t live_vertices = 0;
  std::uint64_t total_vertices = 0;
  std::uint64_t messages = 0;
  std::uint64_t combined_messages = 0;
  std::uint64_t leaf_reads = 0;
  std::uint64_t spill_bytes = 0;
  std::uint64_t channel_bytes = 0;
  double wall_millis = 0;
};

enum class Termination : std::uint8_t { Running, Halted, MaxSupersteps, Failed };
std::string to_string(Termination t);

struct JobReport {
  Termination termination = Termination::Running;
  std::string error;
  /// Number of distinct supersteps executed.
  std::uint64_t supersteps = 0;
  GlobalState final_gs;
  std::vector<SuperstepStats> stats;
  int recoveries = 0;
  std::vector<int> blacklisted;
  std::uint64_t checkpoints = 0;
  std::uint64_t vertices = 0;

  bool ok() const { return termination == Termination::Halted || termination == Termination::MaxSupersteps; }
};

/// Deletions first (one is enough), then the greatest insert by encoded record.
std::vector<Mutation> default_resolve(std::span<const Mutation> group);

/// One Pregel job over a partitioned EngineState.
class Job {
 public:
  /// Throws ValidationError when validate_job(spec) is not empty.
  explicit Job(JobSpec spec, ft::FailureInjector* injector = nullptr);
  ~Job();

  Job(const Job&) = delete;
  Job& operator=(const Job&) = delete;

  /// Loads vertices given in any order. Duplicate vids are a DuplicateKeyError.
  void load(std::vector<VertexTuple> vertices);
  /// Loads the graph text file at spec.input_path.
  void load_input();
  /// Marks the state as loaded after a caller filled the partitions directly.
  void finish_load();
  /// Loads the state saved by a sealed checkpoint, possibly taken with another partition count.
  void restore(const ft::CheckpointInfo& ckpt);

  /// Runs one superstep; true once the job has terminated.
  bool step();
  /// Iterates to termination with checkpoints and recovery. Failures are reported, not
  /// thrown, except validation errors.
  JobReport run();

  /// Every vertex, vid-ascending.
  std::vector<VertexTuple> vertices();
  const GlobalState& gs() const { return state_->gs; }
  const PhysicalPlan& plan() const { return plan_; }
  const JobSpec& spec() const { return spec_; }
  EngineState& state() { return *state_; }
  const std::vector<SuperstepStats>& stats() const { return stats_; }
  bool terminated() const { return termination_ != Termination::Running; }
  Termination termination() const { return termination_; }

  /// Writes the Vertex relation as graph text, one file per partition.
  void dump(const std::filesystem::path& dir);

 private:
  struct PartitionResult;
  class ErrorSlot;

  void compute_partition(int p, std::uint64_t s, dataflow::Exchange<MsgTuple>::Sender& msgs,
                         dataflow::Exchange<Mutation>::Sender& muts, PartitionResult& r);
  void receive_messages(int p, std::uint64_t s, dataflow::Source<MsgTuple>& in, PartitionResult& r);
  void apply_mutations(int p, std::vector<Mutation>& muts, PartitionResult& r);
  void rebuild_vid(int p, std::uint64_t s, PartitionResult& r);
  void take_checkpoint(std::uint64_t s, JobReport& report);
  void recover(const InterruptionError* failure, const std::string& why);

  JobSpec spec_;
  ft::FailureInjector* injector_;
  ft::Blacklist blacklist_;
  dataflow::Combiner combiner_;
  std::unique_ptr<EngineState> state_;
  PhysicalPlan plan_;
  dataflow::DataflowCounters counters_;
  std::vector<SuperstepStats> stats_;
  Termination termination_ = Termination::Running;
  bool loaded_ = false;
  int recoveries_ = 0;
};

/// Loads spec.input_path, runs the job and dumps to spec.output_path when set.
JobReport run_job(const JobSpec& spec, ft::FailureInjector* injector = nullptr);

}  // namespace dfp::runtime
