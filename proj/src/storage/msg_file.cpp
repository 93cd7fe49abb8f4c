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

#include "dfp/storage/msg_file.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>

namespace dfp::storage {

namespace {

std::atomic<std::uint64_t> g_temp_counter{0};

}  // namespace

std::filesystem::path unique_temp_path(const std::filesystem::path& dir, std::string_view tag) {
  std::filesystem::create_directories(dir);
  return dir / (std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(g_temp_counter++) + ".run");
}

std::filesystem::path Layout::temp_file(int k, std::string_view tag) const { return unique_temp_path(tmp_dir(k), tag); }

MsgFileWriter::MsgFileWriter(const std::filesystem::path& path, Order order, std::size_t buffer_bytes)
    : path_(path), buffer_(std::max<std::size_t>(buffer_bytes, 4096)), order_(order) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError("create " + path.string() + ": " + std::strerror(errno));
  std::setvbuf(f_, buffer_.data(), _IOFBF, buffer_.size());
}

MsgFileWriter::~MsgFileWriter() {
  if (f_) std::fclose(f_);
}

void MsgFileWriter::write(const MsgTuple& t) { write_raw(t.vid, t.payload ? &*t.payload : nullptr); }

void MsgFileWriter::write_raw(VertexId vid, const std::string* payload) {
  if (!f_) throw ContractViolation("write to closed message file " + path_.string());
  if (last_ && order_ != Order::Any) {
    if (vid < *last_ || (order_ == Order::StrictlyAscending && vid == *last_)) {
      throw ContractViolation("message file " + path_.string() + ": vid " + std::to_string(vid) + " after " +
                              std::to_string(*last_) + " breaks the sort order");
    }
  }
  last_ = vid;
  char head[13];
  bytes::put_u64_be(head, vid);
  head[8] = payload ? 1 : 0;
  auto len = static_cast<std::uint32_t>(payload ? payload->size() : 0);
  bytes::put_u32_be(head + 9, len);
  if (std::fwrite(head, 1, sizeof(head), f_) != sizeof(head) ||
      (len && std::fwrite(payload->data(), 1, len, f_) != len)) {
    throw IoError("write " + path_.string() + ": " + std::strerror(errno));
  }
  bytes_ += sizeof(head) + len;
  ++count_;
}

void MsgFileWriter::close(bool durable) {
  if (!f_) return;
  bool ok = std::fflush(f_) == 0;
  if (ok && durable) ok = ::fsync(::fileno(f_)) == 0;
  ok = (std::fclose(f_) == 0) && ok;
  f_ = nullptr;
  if (!ok) throw IoError("close " + path_.string() + ": " + std::strerror(errno));
}

MsgFileReader::MsgFileReader(const std::filesystem::path& path, std::size_t buffer_bytes)
    : path_(path), buffer_(std::max<std::size_t>(buffer_bytes, 4096)) {
  f_ = std::fopen(path.c_str(), "rb");
  if (!f_) throw IoError("open " + path.string() + ": " + std::strerror(errno));
  std::setvbuf(f_, buffer_.data(), _IOFBF, buffer_.size());
}

MsgFileReader::~MsgFileReader() {
  if (f_) std::fclose(f_);
}

bool MsgFileReader::next(MsgTuple& out) {
  char head[13];
  std::size_t n = std::fread(head, 1, sizeof(head), f_);
  if (n == 0) return false;
  if (n != sizeof(head)) throw IoError("truncated record header in " + path_.string());
  out.vid = bytes::get_u64_be(head);
  auto len = bytes::get_u32_be(head + 9);
  if (head[8] == 0) {
    if (len != 0) throw IoError("NULL payload with non-zero length in " + path_.string());
    out.payload.reset();
    return true;
  }
  if (!out.payload) out.payload.emplace();
  out.payload->resize(len);
  if (len && std::fread(out.payload->data(), 1, len, f_) != len) {
    throw IoError("truncated payload in " + path_.string());
  }
  return true;
}

void msg_write(const Layout& layout, int partition, std::uint64_t superstep, std::span<const MsgTuple> tuples) {
  std::filesystem::create_directories(layout.part_dir(partition));
  MsgFileWriter w(layout.msg_path(partition, superstep));
  for (const auto& t : tuples) w.write(t);
  w.close();
}

std::vector<MsgTuple> msg_read(const Layout& layout, int partition, std::uint64_t superstep) {
  auto path = layout.msg_path(partition, superstep);
  std::vector<MsgTuple> out;
  if (!std::filesystem::exists(path)) {
    if (superstep == 1) return out;
    throw IoError("missing message file " + path.string());
  }
  MsgFileReader r(path);
  MsgTuple t;
  while (r.next(t)) out.push_back(t);
  return out;
}

}  // namespace dfp::storage
