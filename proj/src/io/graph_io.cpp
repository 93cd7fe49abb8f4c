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

#include "dfp/io/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_set>

#include "dfp/dataflow/group_by.hpp"
#include "dfp/dataflow/stream.hpp"

namespace dfp::io {

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

VertexId parse_vid(std::string_view s) {
  VertexId v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("bad vertex id '" + std::string(s) + "'");
  }
  return v;
}

std::string at_line(std::uint64_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

std::optional<VertexTuple> parse_vertex_line(std::string_view line, const UserProgram& program) {
  line = trim_cr(line);
  auto first = line.find_first_not_of(" \t");
  if (first == std::string_view::npos || line[first] == '#') return std::nullopt;

  std::string_view cols[3];
  int ncols = 0;
  std::size_t pos = 0;
  for (;;) {
    auto tab = line.find('\t', pos);
    if (ncols == 3) throw ValidationError("too many columns");
    cols[ncols++] = line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos);
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  VertexTuple v;
  v.vid = parse_vid(cols[0]);
  if (ncols > 1) v.value = program.value_codec.parse(cols[1]);
  if (ncols > 2 && !cols[2].empty()) {
    std::size_t p = 0;
    const auto list = cols[2];
    while (p <= list.size()) {
      auto comma = list.find(',', p);
      auto item = list.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p);
      auto colon = item.find(':');
      Edge e;
      e.dest = parse_vid(item.substr(0, colon));
      if (colon != std::string_view::npos) e.value = program.edge_codec.parse(item.substr(colon + 1));
      v.edges.push_back(std::move(e));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
  }
  return v;
}

std::string format_vertex_line(const VertexTuple& v, const UserProgram& program) {
  std::string out = std::to_string(v.vid);
  out += '\t';
  out += program.value_codec.format(v.value);
  out += '\t';
  for (std::size_t i = 0; i < v.edges.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v.edges[i].dest);
    if (!v.edges[i].value.empty()) {
      out += ':';
      out += program.edge_codec.format(v.edges[i].value);
    }
  }
  return out;
}

std::vector<VertexTuple> read_graph(const std::filesystem::path& file, const UserProgram& program) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::pair<VertexTuple, std::uint64_t>> rows;
  std::string line;
  std::uint64_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::optional<VertexTuple> v;
    try {
      v = parse_vertex_line(line, program);
    } catch (const Error& e) {
      throw ValidationError(file.string() + ": " + at_line(no, e.what()));
    }
    if (v) rows.emplace_back(std::move(*v), no);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.vid < b.first.vid; });
  std::vector<VertexTuple> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i && rows[i].first.vid == rows[i - 1].first.vid) {
      throw ValidationError(file.string() + ": duplicate vertex id " + std::to_string(rows[i].first.vid) +
                            " on lines " + std::to_string(rows[i - 1].second) + " and " +
                            std::to_string(rows[i].second));
    }
    out.push_back(std::move(rows[i].first));
  }
  return out;
}

void write_graph(const std::filesystem::path& file, std::span<const VertexTuple> vertices,
                 const UserProgram& program) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + file.string());
  for (const auto& v : vertices) out << format_vertex_line(v, program) << '\n';
  if (!out.flush()) throw IoError("write failed: " + file.string());
}

GraphCounts load_graph(const std::filesystem::path& file, runtime::EngineState& state, const UserProgram& program) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  const int n = state.num_partitions();
  const std::size_t budget = std::max<std::size_t>(state.memory.group_by_bytes / static_cast<std::size_t>(n), 1 << 20);
  std::vector<std::unique_ptr<dataflow::ExternalSort>> sorters;
  for (int p = 0; p < n; ++p) {
    sorters.push_back(std::make_unique<dataflow::ExternalSort>(
        dataflow::GroupByOptions{budget, state.layout.tmp_dir(p), nullptr}));
  }

  GraphCounts counts;
  std::string line;
  std::uint64_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::optional<VertexTuple> v;
    try {
      v = parse_vertex_line(line, program);
      if (v && program.validate_vertex) {
        if (auto err = program.validate_vertex(*v)) throw ValidationError(*err);
      }
    } catch (const Error& e) {
      throw ValidationError(file.string() + ": " + at_line(no, e.what()));
    }
    if (!v) continue;
    ++counts.vertices;
    counts.edges += v->edges.size();
    std::string payload;
    bytes::append_u64_be(payload, no);
    payload += encode_vertex_record(*v);
    sorters[static_cast<std::size_t>(dataflow::partition_fn(v->vid, n))]->add({v->vid, std::move(payload)});
  }
  if (in.bad()) throw IoError("read failed: " + file.string());

  for (int p = 0; p < n; ++p) {
    auto& sorter = *sorters[static_cast<std::size_t>(p)];
    sorter.finish();
    auto& ps = state.parts[static_cast<std::size_t>(p)];
    auto loader = ps.vertex->loader();
    MsgTuple t;
    std::optional<std::pair<VertexId, std::uint64_t>> prev;
    std::uint64_t loaded = 0;
    while (sorter.next(t)) {
      const auto line_no = bytes::get_u64_be(t.payload->data());
      if (prev && prev->first == t.vid) {
        throw ValidationError(file.string() + ": duplicate vertex id " + std::to_string(t.vid) + " on lines " +
                              std::to_string(prev->second) + " and " + std::to_string(line_no));
      }
      prev = {t.vid, line_no};
      loader->add(t.vid, std::string_view(*t.payload).substr(8));
      ++loaded;
    }
    loader->finish();
    ps.vertex_count = loaded;
  }
  return counts;
}

void dump_result(runtime::EngineState& state, const UserProgram& program, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int p = 0; p < state.num_partitions(); ++p) {
    auto file = dir / ("part-" + std::to_string(p) + ".txt");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + file.string());
    auto scan = state.parts[static_cast<std::size_t>(p)].vertex->scan();
    VertexTuple v;
    while (scan.next(v)) out << format_vertex_line(v, program) << '\n';
    if (!out.flush()) throw IoError("write failed: " + file.string());
  }
}

std::vector<VertexTuple> read_dump(const std::filesystem::path& dir, const UserProgram& program) {
  std::vector<VertexTuple> all;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (!name.starts_with("part-") || !name.ends_with(".txt")) continue;
    auto part = read_graph(entry.path(), program);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.vid < b.vid; });
  return all;
}

std::optional<GraphKind> parse_graph_kind(std::string_view s) {
  if (s == "uniform") return GraphKind::Uniform;
  if (s == "powerlaw") return GraphKind::PowerLaw;
  if (s == "path") return GraphKind::Path;
  if (s == "cycle") return GraphKind::Cycle;
  return std::nullopt;
}

std::uint64_t SimpleGraph::edges() const {
  std::uint64_t m = 0;
  for (const auto& a : adj) m += a.size();
  return m;
}

SimpleGraph gen_graph(const GenOptions& opts) {
  if (opts.vertices < 1) throw ValidationError("a generated graph needs at least one vertex");
  const std::uint64_t n = opts.vertices;
  std::mt19937_64 rng(opts.seed);
  std::vector<std::vector<VertexId>> dests(n);
  auto pick_distinct = [&](std::uint64_t src, std::uint64_t degree) {
    degree = std::min<std::uint64_t>(degree, n - 1);
    std::uniform_int_distribution<std::uint64_t> any(1, n);
    std::unordered_set<VertexId> seen;
    auto& out = dests[src - 1];
    while (out.size() < degree) {
      VertexId d = any(rng);
      if (d != src && seen.insert(d).second) out.push_back(d);
    }
  };

  switch (opts.kind) {
    case GraphKind::Path:
    case GraphKind::Cycle:
      for (std::uint64_t i = 1; i < n; ++i) dests[i - 1].push_back(i + 1);
      if (opts.kind == GraphKind::Cycle && n > 1) dests[n - 1].push_back(1);
      break;
    case GraphKind::Uniform: {
      std::poisson_distribution<std::uint64_t> deg(opts.avg_degree);
      for (std::uint64_t v = 1; v <= n; ++v) pick_distinct(v, deg(rng));
      break;
    }
    case GraphKind::PowerLaw: {
      // Pareto out-degrees with density exponent 2.2, scaled to the requested mean.
      constexpr double kAlpha = 1.2;
      const double xmin = std::max(1.0, opts.avg_degree * (kAlpha - 1) / kAlpha);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::uint64_t v = 1; v <= n; ++v) {
        double x = xmin * std::pow(1.0 - u(rng), -1.0 / kAlpha);
        auto d = static_cast<std::uint64_t>(std::min(x, static_cast<double>(n - 1)));
        pick_distinct(v, d);
      }
      break;
    }
  }

  if (opts.undirected) {
    std::vector<std::vector<VertexId>> both(n);
    for (std::uint64_t v = 1; v <= n; ++v) {
      for (VertexId d : dests[v - 1]) {
        both[v - 1].push_back(d);
        both[d - 1].push_back(v);
      }
    }
    for (auto& a : both) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    dests = std::move(both);
  }

  SimpleGraph g;
  g.adj.resize(n);
  std::uniform_int_distribution<std::uint32_t> weight(1, std::max<std::uint32_t>(opts.max_weight, 1));
  for (std::uint64_t v = 0; v < n; ++v) {
    for (VertexId d : dests[v]) g.adj[v].emplace_back(d, opts.max_weight ? weight(rng) : 0);
  }
  if (opts.undirected && opts.max_weight) {
    // Both directions of an undirected edge carry the same weight.
    for (std::uint64_t v = 1; v <= n; ++v) {
      for (auto& [d, w] : g.adj[v - 1]) {
        if (d < v) {
          auto& back = g.adj[d - 1];
          auto it = std::lower_bound(back.begin(), back.end(), v,
                                     [](const auto& e, VertexId key) { return e.first < key; });
          w = it->second;
        }
      }
    }
  }
  return g;
}

namespace {

std::string simple_line(const SimpleGraph& g, std::uint64_t i) {
  std::string line = std::to_string(i + 1);
  line += "\t\t";
  bool first = true;
  for (const auto& [d, w] : g.adj[i]) {
    if (!first) line += ',';
    first = false;
    line += std::to_string(d);
    if (w) {
      line += ':';
      line += std::to_string(w);
    }
  }
  return line;
}

}  // namespace

void write_simple_graph(const std::filesystem::path& file, const SimpleGraph& g) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + file.string());
  for (std::uint64_t i = 0; i < g.vertices(); ++i) out << simple_line(g, i) << '\n';
  if (!out.flush()) throw IoError("write failed: " + file.string());
}

std::vector<VertexTuple> to_vertices(const SimpleGraph& g, const UserProgram& program) {
  std::vector<VertexTuple> out;
  out.reserve(g.vertices());
  for (std::uint64_t i = 0; i < g.vertices(); ++i) {
    auto v = parse_vertex_line(simple_line(g, i), program);
    if (program.validate_vertex) {
      if (auto err = program.validate_vertex(*v)) throw ValidationError(*err);
    }
    out.push_back(std::move(*v));
  }
  return out;
}

}  // namespace dfp::io
