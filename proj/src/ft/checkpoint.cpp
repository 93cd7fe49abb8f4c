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

#include "dfp/ft/checkpoint.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <fstream>
#include <json.hpp>
#include <memory>

#include "dfp/dataflow/stream.hpp"
#include "dfp/runtime/global_state.hpp"

namespace dfp::ft {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMarker = "COMMITTED";
constexpr const char* kManifest = "manifest.json";

void fsync_path(const fs::path& p, bool directory = false) {
  int fd = ::open(p.c_str(), directory ? O_RDONLY | O_DIRECTORY : O_RDONLY);
  if (fd < 0) throw IoError("cannot open " + p.string() + " for fsync");
  int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) throw IoError("fsync failed: " + p.string());
}

std::string file_name(const char* kind, int p) { return std::string(kind) + "-" + std::to_string(p) + ".dat"; }

/// A checkpoint relation file of one old partition, keeping only the vids of `keep`.
class FilteredFile final : public dataflow::Source<MsgTuple> {
 public:
  FilteredFile(const fs::path& file, int keep, int partitions)
      : reader_(file, 64 << 10), keep_(keep), partitions_(partitions) {}
  bool next(MsgTuple& out) override {
    while (reader_.next(out))
      if (dataflow::partition_fn(out.vid, partitions_) == keep_) return true;
    return false;
  }

 private:
  storage::MsgFileReader reader_;
  int keep_;
  int partitions_;
};

/// Merges `kind` files of every old partition into the vid-ordered stream of partition `q`.
class Repartitioned {
 public:
  Repartitioned(const CheckpointInfo& ckpt, const char* kind, int q, int partitions) {
    for (int p = 0; p < ckpt.partitions; ++p) {
      inputs_.push_back(std::make_unique<FilteredFile>(ckpt.dir / file_name(kind, p), q, partitions));
      raw_.push_back(inputs_.back().get());
    }
    merged_ = std::make_unique<dataflow::MergeSource<MsgTuple>>(raw_, std::string("checkpoint ") + kind);
  }
  bool next(MsgTuple& out) { return merged_->next(out); }

 private:
  std::vector<std::unique_ptr<FilteredFile>> inputs_;
  std::vector<dataflow::Source<MsgTuple>*> raw_;
  std::unique_ptr<dataflow::MergeSource<MsgTuple>> merged_;
};

std::optional<std::uint64_t> superstep_of(const fs::path& dir) {
  auto name = dir.filename().string();
  if (!name.starts_with("sp-")) return std::nullopt;
  try {
    std::size_t used = 0;
    auto s = std::stoull(name.substr(3), &used);
    if (used != name.size() - 3) return std::nullopt;
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

fs::path checkpoint_dir(const fs::path& root, std::uint64_t superstep) {
  return root / ("sp-" + std::to_string(superstep));
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) { EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr); }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

CheckpointInfo write_checkpoint(runtime::EngineState& state, const fs::path& root, std::uint64_t superstep,
                                FailureInjector* injector) {
  CheckpointInfo info{superstep, checkpoint_dir(root, superstep), state.num_partitions(),
                      state.plan.join == JoinStrategy::LeftOuter};
  std::error_code ec;
  fs::remove_all(info.dir, ec);
  fs::create_directories(info.dir);
  const bool fail = injector && injector->take_checkpoint_failure(superstep);

  json files = json::object();
  for (int p = 0; p < info.partitions; ++p) {
    auto& ps = state.parts[static_cast<std::size_t>(p)];
    {
      storage::MsgFileWriter out(info.dir / file_name("vertex", p), storage::MsgFileWriter::Order::StrictlyAscending);
      auto scan = ps.vertex->scan();
      VertexTuple v;
      while (scan.next(v)) {
        auto rec = encode_vertex_record(v);
        out.write_raw(v.vid, &rec);
      }
      out.close(true);
    }
    if (fail && p == info.partitions / 2) throw IoError("checkpoint " + std::to_string(superstep) + " interrupted");
    auto msg_src = state.layout.msg_path(p, superstep + 1);
    auto msg_dst = info.dir / file_name("msg", p);
    if (fs::exists(msg_src)) {
      fs::copy_file(msg_src, msg_dst, fs::copy_options::overwrite_existing);
    } else {
      storage::MsgFileWriter(msg_dst).close();
    }
    fsync_path(msg_dst);
    if (info.has_vid) {
      storage::MsgFileWriter out(info.dir / file_name("vid", p), storage::MsgFileWriter::Order::StrictlyAscending);
      if (ps.vid) {
        auto scan = ps.vid->scan();
        storage::IndexRecord rec;
        while (scan->next(rec)) out.write_raw(rec.key, nullptr);
      }
      out.close(true);
    }
    for (const char* kind : {"vertex", "msg", "vid"}) {
      auto name = file_name(kind, p);
      if (fs::exists(info.dir / name)) files[name] = sha256_file(info.dir / name);
    }
  }

  json manifest{{"superstep", superstep},
                {"partitions", info.partitions},
                {"hasVid", info.has_vid},
                {"files", files}};
  {
    std::ofstream out(info.dir / kManifest, std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out.flush()) throw IoError("cannot write checkpoint manifest");
  }
  fsync_path(info.dir / kManifest);
  {
    std::ofstream out(info.dir / kMarker, std::ios::trunc);
    out << superstep << '\n';
    if (!out.flush()) throw IoError("cannot write checkpoint marker");
  }
  fsync_path(info.dir / kMarker);
  fsync_path(info.dir, true);
  return info;
}

namespace {

std::optional<CheckpointInfo> inspect(const fs::path& dir, std::string* why) {
  auto fail = [&](std::string msg) -> std::optional<CheckpointInfo> {
    if (why) *why = std::move(msg);
    return std::nullopt;
  };
  if (!fs::exists(dir / kMarker)) return fail("not sealed");
  json m;
  try {
    std::ifstream in(dir / kManifest);
    m = json::parse(in);
  } catch (const std::exception& e) {
    return fail(std::string("bad manifest: ") + e.what());
  }
  CheckpointInfo info;
  try {
    info.superstep = m.at("superstep").get<std::uint64_t>();
    info.partitions = m.at("partitions").get<int>();
    info.has_vid = m.at("hasVid").get<bool>();
    info.dir = dir;
    for (int p = 0; p < info.partitions; ++p) {
      for (const char* kind : {"vertex", "msg", "vid"}) {
        if (std::string(kind) == "vid" && !info.has_vid) continue;
        auto name = file_name(kind, p);
        if (!m.at("files").contains(name)) return fail("manifest lacks " + name);
      }
    }
    for (const auto& [name, hash] : m.at("files").items()) {
      if (!fs::exists(dir / name)) return fail("missing " + name);
      if (sha256_file(dir / name) != hash.get<std::string>()) return fail("hash mismatch on " + name);
    }
  } catch (const std::exception& e) {
    return fail(std::string("bad manifest: ") + e.what());
  }
  return info;
}

}  // namespace

bool verify_checkpoint(const fs::path& dir, std::string* why) { return inspect(dir, why).has_value(); }

std::optional<CheckpointInfo> latest_sealed_checkpoint(const fs::path& root) {
  std::vector<std::pair<std::uint64_t, fs::path>> dirs;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root, ec)) {
    if (auto s = superstep_of(e.path())) dirs.emplace_back(*s, e.path());
  }
  std::sort(dirs.rbegin(), dirs.rend());
  for (const auto& [s, dir] : dirs) {
    if (auto info = inspect(dir, nullptr)) return info;
  }
  return std::nullopt;
}

void prune_checkpoints(const fs::path& root, std::size_t keep) {
  std::vector<std::pair<std::uint64_t, fs::path>> dirs;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root, ec)) {
    if (auto s = superstep_of(e.path())) dirs.emplace_back(*s, e.path());
  }
  std::sort(dirs.rbegin(), dirs.rend());
  std::size_t sealed = 0;
  for (const auto& [s, dir] : dirs) {
    if (fs::exists(dir / kMarker) && sealed < keep) {
      ++sealed;
      continue;
    }
    fs::remove_all(dir, ec);
  }
}

void recover(runtime::EngineState& state, const CheckpointInfo& ckpt, const runtime::PartitionMap& pmap) {
  std::string why;
  if (!inspect(ckpt.dir, &why)) throw IoError("checkpoint " + ckpt.dir.string() + " unusable: " + why);
  const bool want_vid = state.plan.join == JoinStrategy::LeftOuter;
  if (want_vid && !ckpt.has_vid) throw IoError("checkpoint " + ckpt.dir.string() + " has no Vid relation");
  state.reset_partitions(pmap);
  const int n = pmap.partitions();
  const std::uint64_t next = ckpt.superstep + 1;
  for (int q = 0; q < n; ++q) {
    auto& ps = state.parts[static_cast<std::size_t>(q)];
    MsgTuple t;
    {
      Repartitioned in(ckpt, "vertex", q, n);
      auto loader = ps.vertex->loader();
      std::uint64_t count = 0;
      while (in.next(t)) {
        loader->add(t.vid, *t.payload);
        ++count;
      }
      loader->finish();
      ps.vertex_count = count;
    }
    {
      Repartitioned in(ckpt, "msg", q, n);
      storage::MsgFileWriter out(state.layout.msg_path(q, next), storage::MsgFileWriter::Order::StrictlyAscending);
      while (in.next(t)) out.write(t);
      out.close();
    }
    if (want_vid) {
      Repartitioned in(ckpt, "vid", q, n);
      auto vid = state.create_vid_index(q, next);
      auto loader = vid->bulk_loader();
      while (in.next(t)) loader.add(t.vid, {});
      loader.finish();
      ps.vid = std::move(vid);
    }
  }
  auto root = state.layout.root();
  state.gs = runtime::read_gs(runtime::gs_history_path(root, next));
  runtime::write_gs(root, state.gs);
}

}  // namespace dfp::ft
