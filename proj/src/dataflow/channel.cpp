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

#include "dfp/dataflow/channel.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace dfp::dataflow {

void TupleCodec<MsgTuple>::encode(std::string& out, const MsgTuple& t) {
  bytes::append_u64_be(out, t.vid);
  out.push_back(t.payload ? 1 : 0);
  bytes::append_u32_be(out, static_cast<std::uint32_t>(t.payload ? t.payload->size() : 0));
  if (t.payload) out.append(*t.payload);
}

bool TupleCodec<MsgTuple>::decode(const char*& p, const char* end, MsgTuple& out) {
  if (end - p < 13) return false;
  auto len = bytes::get_u32_be(p + 9);
  if (static_cast<std::size_t>(end - p) < 13 + std::size_t{len}) return false;
  out.vid = bytes::get_u64_be(p);
  if (p[8]) {
    out.payload.emplace(p + 13, len);
  } else {
    out.payload.reset();
  }
  p += 13 + len;
  return true;
}

void TupleCodec<Mutation>::encode(std::string& out, const Mutation& m) {
  out.push_back(static_cast<char>(m.kind));
  bytes::append_u64_be(out, m.vertex.vid);
  auto rec = encode_vertex_record(m.vertex);
  bytes::append_u32_be(out, static_cast<std::uint32_t>(rec.size()));
  out.append(rec);
}

bool TupleCodec<Mutation>::decode(const char*& p, const char* end, Mutation& out) {
  if (end - p < 13) return false;
  auto len = bytes::get_u32_be(p + 9);
  if (static_cast<std::size_t>(end - p) < 13 + std::size_t{len}) return false;
  out.kind = static_cast<MutationKind>(p[0]);
  out.vertex = decode_vertex_record(bytes::get_u64_be(p + 1), std::string_view(p + 13, len));
  p += 13 + len;
  return true;
}

std::size_t TupleCodec<Mutation>::size(const Mutation& m) {
  std::size_t n = 13 + 9 + m.vertex.value.size();
  for (const auto& e : m.vertex.edges) n += 12 + e.value.size();
  return n;
}

Spool::Spool(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
  if (fd_ < 0) throw IoError("create spool " + path.string() + ": " + std::strerror(errno));
}

Spool::~Spool() {
  if (fd_ >= 0) ::close(fd_);
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void Spool::append(const std::string& data) {
  std::uint64_t off;
  {
    std::lock_guard lock(mu_);
    off = committed_;
  }
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::pwrite(fd_, data.data() + done, data.size() - done, static_cast<off_t>(off + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write spool " + path_.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  std::lock_guard lock(mu_);
  committed_ += data.size();
  cv_.notify_all();
}

void Spool::finish() {
  std::lock_guard lock(mu_);
  finished_ = true;
  cv_.notify_all();
}

void Spool::abort() {
  std::lock_guard lock(mu_);
  aborted_ = true;
  cv_.notify_all();
}

std::size_t Spool::read(std::uint64_t offset, std::size_t max_bytes, std::string& out) {
  std::uint64_t available;
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return aborted_ || finished_ || committed_ > offset; });
    if (aborted_) throw ChannelClosed("spool aborted");
    available = committed_ - offset;
  }
  std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(available, max_bytes));
  out.resize(want);
  std::size_t done = 0;
  while (done < want) {
    ssize_t n = ::pread(fd_, out.data() + done, want - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("read spool " + path_.string() + ": " + std::strerror(errno));
    }
    if (n == 0) throw IoError("spool " + path_.string() + " shorter than published");
    done += static_cast<std::size_t>(n);
  }
  return want;
}

}  // namespace dfp::dataflow
