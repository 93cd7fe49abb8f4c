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

// dfpregel: load a graph, run a vertex program under a chosen physical plan, dump the
// result. Exit codes: 0 success, 1 validation or usage error, 2 job failure.

#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "dfp/algorithms/algorithms.hpp"
#include "dfp/ft/checkpoint.hpp"
#include "dfp/io/graph_io.hpp"
#include "dfp/runtime/job.hpp"

namespace fs = std::filesystem;
using namespace dfp;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;

struct RunFlags {
  std::string algo = "pagerank";
  algorithms::ProgramArgs args;
  std::string join, group_by, connector, storage;
  int workers = 0;
  int partitions = 0;
  std::string input, output, stats, workdir;
  double buffer_cache_mb = 64, groupby_mb = 64, mem_scale = 1;
  std::uint64_t checkpoint_every = 0;
  std::uint64_t max_supersteps = 1'000'000;
};

void add_job_flags(CLI::App* cmd, RunFlags& f, bool need_input) {
  cmd->add_option("--algo", f.algo, "pagerank | sssp | cc | mutate-test")->capture_default_str();
  cmd->add_option("--source", f.args.source, "SSSP source vid")->capture_default_str();
  cmd->add_option("--iterations", f.args.iterations, "PageRank iterations")->capture_default_str();
  cmd->add_option("--damping", f.args.damping, "PageRank damping")->capture_default_str();
  cmd->add_option("--script-seed", f.args.script_seed, "mutate-test script seed")->capture_default_str();
  cmd->add_option("--script-supersteps", f.args.script_supersteps, "mutate-test script length")->capture_default_str();
  cmd->add_option("--script-ops", f.args.script_ops, "mutate-test mutations per superstep")->capture_default_str();
  cmd->add_option("--join", f.join, "outer | leftouter");
  cmd->add_option("--groupby", f.group_by, "sort | hashsort | preclustered");
  cmd->add_option("--connector", f.connector, "pipelined | merge");
  cmd->add_option("--storage", f.storage, "btree | lsm");
  cmd->add_option("--workers", f.workers, "worker tasks (default: logical cores)");
  cmd->add_option("--partitions", f.partitions, "partitions (default: workers)");
  auto* in = cmd->add_option("--input", f.input, "graph text file");
  if (need_input) in->required();
  cmd->add_option("--workdir", f.workdir, "working directory (default: $PREGELIX_WORKDIR or a temp dir)");
  cmd->add_option("--buffer-cache-mb", f.buffer_cache_mb, "buffer cache size")->capture_default_str();
  cmd->add_option("--groupby-mb", f.groupby_mb, "memory per group-by instance")->capture_default_str();
  cmd->add_option("--mem-scale", f.mem_scale, "divides both memory knobs")->capture_default_str();
  cmd->add_option("--checkpoint-every", f.checkpoint_every, "supersteps between checkpoints (0: never)");
  cmd->add_option("--max-supersteps", f.max_supersteps, "superstep limit")->capture_default_str();
}

template <class T>
T parse_flag(const std::string& text, std::optional<T> (*parse)(std::string_view), const char* flag) {
  auto v = parse(text);
  if (!v) throw ValidationError(std::string("bad value for ") + flag + ": '" + text + "'");
  return *v;
}

/// Scratch work directory that is removed unless the user chose it.
class WorkDir {
 public:
  explicit WorkDir(const std::string& flag) {
    if (!flag.empty()) {
      path_ = flag;
    } else if (const char* env = std::getenv("PREGELIX_WORKDIR"); env && *env) {
      path_ = env;
    } else {
      path_ = fs::temp_directory_path() / ("dfpregel-" + std::to_string(::getpid()));
      owned_ = true;
    }
    fs::create_directories(path_);
  }
  ~WorkDir() {
    std::error_code ec;
    if (owned_) fs::remove_all(path_, ec);
  }
  fs::path sub(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

JobSpec make_spec(const RunFlags& f) {
  JobSpec spec;
  spec.program = algorithms::program_by_name(f.algo, f.args);
  spec.plan = spec.program.plan_hint;
  if (!f.join.empty()) spec.plan.join = parse_flag<JoinStrategy>(f.join, parse_join, "--join");
  if (!f.group_by.empty()) spec.plan.group_by = parse_flag<GroupByStrategy>(f.group_by, parse_group_by, "--groupby");
  if (!f.connector.empty()) spec.plan.connector = parse_flag<ConnectorKind>(f.connector, parse_connector, "--connector");
  if (!f.storage.empty()) spec.plan.storage = parse_flag<StorageKind>(f.storage, parse_storage, "--storage");
  spec.num_workers = f.workers > 0 ? f.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  spec.num_partitions = f.partitions > 0 ? f.partitions : spec.num_workers;
  if (f.workers < 0 || f.partitions < 0) throw ValidationError("--workers and --partitions must be positive");
  if (!(f.mem_scale > 0)) throw ValidationError("--mem-scale must be positive");
  spec.memory.buffer_cache_bytes = static_cast<std::size_t>(f.buffer_cache_mb * (1 << 20) / f.mem_scale);
  spec.memory.group_by_bytes = static_cast<std::size_t>(f.groupby_mb * (1 << 20) / f.mem_scale);
  spec.input_path = f.input;
  spec.output_path = f.output;
  spec.checkpoint_every = f.checkpoint_every;
  spec.max_supersteps = f.max_supersteps;
  auto errors = validate_job(spec);
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    throw ValidationError(msg);
  }
  return spec;
}

void write_stats(std::ostream& out, const std::vector<runtime::SuperstepStats>& rows) {
  out << "superstep,liveVertices,messages,combinedMessages,leafReads,spillBytes,channelBytes,wallMillis\n";
  for (const auto& r : rows) {
    out << r.superstep << ',' << r.live_vertices << ',' << r.messages << ',' << r.combined_messages << ','
        << r.leaf_reads << ',' << r.spill_bytes << ',' << r.channel_bytes << ',' << std::fixed
        << std::setprecision(3) << r.wall_millis << std::defaultfloat << '\n';
  }
}

int report_failure(const runtime::JobReport& rep) {
  std::cerr << "dfpregel: job failed: " << rep.error << '\n';
  return kFailed;
}

int cmd_run(const RunFlags& f) {
  auto spec = make_spec(f);
  if (spec.output_path.empty()) throw ValidationError("--output is required");
  WorkDir work(f.workdir);
  spec.work_dir = work.sub("job").string();
  auto rep = runtime::run_job(spec);
  auto stats_path = f.stats.empty() ? fs::path(spec.output_path) / "stats.csv" : fs::path(f.stats);
  if (!stats_path.parent_path().empty()) fs::create_directories(stats_path.parent_path());
  std::ofstream stats(stats_path);
  write_stats(stats, rep.stats);
  if (!rep.ok()) return report_failure(rep);
  std::cerr << "dfpregel: " << spec.program.name << " under " << to_string(spec.plan) << ": "
            << to_string(rep.termination) << " after " << rep.supersteps << " supersteps, " << rep.vertices
            << " vertices\n";
  return kOk;
}

int cmd_gen(io::GenOptions& o, const std::string& kind, const std::string& output) {
  auto k = io::parse_graph_kind(kind);
  if (!k) throw ValidationError("unknown graph kind '" + kind + "' (uniform, powerlaw, path, cycle)");
  o.kind = *k;
  auto g = io::gen_graph(o);
  io::write_simple_graph(output, g);
  std::cerr << "dfpregel: wrote " << g.vertices() << " vertices, " << g.edges() << " edges to " << output << '\n';
  return kOk;
}

std::string canonical_text(const std::vector<VertexTuple>& vs, const UserProgram& p) {
  std::string all;
  for (const auto& v : vs) {
    all += io::format_vertex_line(v, p);
    all += '\n';
  }
  return all;
}

int cmd_bench(const RunFlags& f, std::ostream& out) {
  auto base = make_spec(f);
  WorkDir work(f.workdir);
  std::vector<VertexTuple> first;
  out << "plan,join,groupby,connector,storage,termination,supersteps,leafReads,spillBytes,channelBytes,wallMillis,"
         "maxRelDiff,checksum\n";
  int rc = kOk;
  for (const auto& cfg : all_plan_configs()) {
    auto spec = base;
    spec.plan = cfg;
    spec.output_path.clear();
    spec.work_dir = work.sub("bench").string();
    fs::remove_all(spec.work_dir);
    runtime::Job job(spec);
    auto t0 = std::chrono::steady_clock::now();
    job.load_input();
    auto rep = job.run();
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    auto vs = job.vertices();
    std::uint64_t leaf = 0, spill = 0, chan = 0;
    for (const auto& s : rep.stats) {
      leaf += s.leaf_reads;
      spill += s.spill_bytes;
      chan += s.channel_bytes;
    }
    if (first.empty()) first = vs;
    double max_rel = 0;
    if (vs.size() != first.size()) {
      max_rel = INFINITY;
    } else if (spec.program.value_codec.name == "f64") {
      for (std::size_t i = 0; i < vs.size(); ++i) {
        double a = vs[i].value.empty() ? 0 : decode_f64(vs[i].value);
        double b = first[i].value.empty() ? 0 : decode_f64(first[i].value);
        if (a != b) max_rel = std::max(max_rel, std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)));
      }
    }
    if (!rep.ok()) rc = kFailed;
    out << to_string(cfg) << ',' << to_string(cfg.join) << ',' << to_string(cfg.group_by) << ','
        << to_string(cfg.connector) << ',' << to_string(cfg.storage) << ',' << to_string(rep.termination) << ','
        << rep.supersteps << ',' << leaf << ',' << spill << ',' << chan << ',' << std::fixed << std::setprecision(1)
        << ms << std::defaultfloat << ',' << max_rel << ',' << ft::sha256_hex(canonical_text(vs, spec.program))
        << '\n';
    if (!rep.ok()) std::cerr << "dfpregel: " << to_string(cfg) << ": " << rep.error << '\n';
  }
  return rc;
}

int cmd_recover_test(const RunFlags& f, std::uint64_t fail_superstep, int fail_worker) {
  auto spec = make_spec(f);
  if (spec.checkpoint_every == 0) spec.checkpoint_every = 1;
  WorkDir work(f.workdir);
  spec.output_path.clear();

  auto run = [&](const std::string& name, ft::FailureInjector* inj) {
    auto s = spec;
    s.work_dir = work.sub(name).string();
    fs::remove_all(s.work_dir);
    runtime::Job job(s, inj);
    job.load_input();
    auto rep = job.run();
    return std::make_pair(rep, job.vertices());
  };
  auto [clean, clean_vs] = run("clean", nullptr);
  if (!clean.ok()) return report_failure(clean);
  ft::FailureInjector inj;
  inj.fail_worker_at(fail_worker, fail_superstep);
  auto [failed, failed_vs] = run("failed", &inj);
  std::cout << "failure: worker " << fail_worker << " at superstep " << fail_superstep << " (fired " << inj.fired()
            << ")\n"
            << "recoveries: " << failed.recoveries << '\n'
            << "termination: " << to_string(failed.termination) << '\n';
  if (!failed.ok()) {
    std::cout << "diagnostic: " << failed.error << '\n';
    return kFailed;
  }
  bool same = clean_vs.size() == failed_vs.size();
  for (std::size_t i = 0; same && i < clean_vs.size(); ++i) {
    if (spec.program.value_codec.name == "f64" && !clean_vs[i].value.empty() && !failed_vs[i].value.empty()) {
      double a = decode_f64(clean_vs[i].value), b = decode_f64(failed_vs[i].value);
      same = clean_vs[i].vid == failed_vs[i].vid &&
             (a == b || std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b)));
    } else {
      same = clean_vs[i] == failed_vs[i];
    }
  }
  std::cout << "results: " << (same ? "identical" : "DIFFERENT") << '\n';
  return same ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dfpregel: Pregel programs as relational dataflows"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run a vertex program");
  add_job_flags(run, run_flags, true);
  run->add_option("--output", run_flags.output, "result directory (part-<k>.txt)")->required();
  run->add_option("--stats", run_flags.stats, "stats CSV (default: <output>/stats.csv)");

  io::GenOptions gen_opts;
  std::string gen_kind = "uniform", gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic graph");
  gen->add_option("--kind", gen_kind, "uniform | powerlaw | path | cycle")->capture_default_str();
  gen->add_option("-n,--vertices", gen_opts.vertices, "vertex count")->capture_default_str();
  gen->add_option("--avg-degree", gen_opts.avg_degree, "mean out-degree")->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "random seed")->capture_default_str();
  gen->add_option("--max-weight", gen_opts.max_weight, "edge weights in [1, w]; 0 for none")->capture_default_str();
  gen->add_flag("--undirected", gen_opts.undirected, "emit both directions of every edge");
  gen->add_option("--output", gen_out, "graph text file")->required();

  RunFlags bench_flags;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench-plans", "run all sixteen plans and compare");
  add_job_flags(bench, bench_flags, true);
  bench->add_option("--output", bench_out, "CSV file (default: stdout)");

  RunFlags rt_flags;
  std::uint64_t fail_superstep = 3;
  int fail_worker = 0;
  auto* rt = app.add_subcommand("recover-test", "compare a run with an injected failure to a clean run");
  add_job_flags(rt, rt_flags, true);
  rt->add_option("--fail-superstep", fail_superstep, "superstep at which the worker fails")->capture_default_str();
  rt->add_option("--fail-worker", fail_worker, "failing worker")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*gen) return cmd_gen(gen_opts, gen_kind, gen_out);
    if (*bench) {
      if (bench_out.empty()) return cmd_bench(bench_flags, std::cout);
      std::ofstream out(bench_out);
      return cmd_bench(bench_flags, out);
    }
    if (*rt) return cmd_recover_test(rt_flags, fail_superstep, fail_worker);
  } catch (const ValidationError& e) {
    std::cerr << "dfpregel: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "dfpregel: " << e.what() << '\n';
    return kFailed;
  }
  return kInvalid;
}
