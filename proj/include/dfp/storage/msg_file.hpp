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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfp/api.hpp"

namespace dfp::storage {

/// Directory layout of a job's working directory.
class Layout {
 public:
  explicit Layout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path part_dir(int k) const { return root_ / ("part-" + std::to_string(k)); }
  std::filesystem::path msg_path(int k, std::uint64_t superstep) const {
    return part_dir(k) / ("msg-" + std::to_string(superstep) + ".dat");
  }
  std::filesystem::path vid_path(int k, std::uint64_t superstep) const {
    return part_dir(k) / ("vid-" + std::to_string(superstep) + ".btree");
  }
  std::filesystem::path tmp_dir(int k) const { return part_dir(k) / "tmp"; }
  std::filesystem::path gs_path() const { return root_ / "gs.json"; }
  std::filesystem::path gs_history_dir() const { return root_ / "gs"; }

  /// A fresh file name under tmp_dir(k).
  std::filesystem::path temp_file(int k, std::string_view tag) const;

 private:
  std::filesystem::path root_;
};

/// A fresh, unused file name inside `dir` (created if needed).
std::filesystem::path unique_temp_path(const std::filesystem::path& dir, std::string_view tag);

/// Writes the message file framing: [vid:8 BE][tag:1][len:4 BE][payload]. Tag 0 is NULL.
class MsgFileWriter {
 public:
  enum class Order { Any, Ascending, StrictlyAscending };

  explicit MsgFileWriter(const std::filesystem::path& path, Order order = Order::Ascending,
                         std::size_t buffer_bytes = 256 << 10);
  ~MsgFileWriter();

  MsgFileWriter(const MsgFileWriter&) = delete;
  MsgFileWriter& operator=(const MsgFileWriter&) = delete;

  void write(const MsgTuple& t);
  void write(VertexId vid, const std::optional<std::string>& payload) { write_raw(vid, payload ? &*payload : nullptr); }
  void write_raw(VertexId vid, const std::string* payload);
  /// Flushes; with `durable` also fsyncs.
  void close(bool durable = false);

  std::uint64_t bytes() const { return bytes_; }
  std::uint64_t count() const { return count_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* f_ = nullptr;
  std::vector<char> buffer_;
  Order order_;
  std::optional<VertexId> last_;
  std::uint64_t bytes_ = 0;
  std::uint64_t count_ = 0;
};

class MsgFileReader {
 public:
  explicit MsgFileReader(const std::filesystem::path& path, std::size_t buffer_bytes = 256 << 10);
  ~MsgFileReader();

  MsgFileReader(const MsgFileReader&) = delete;
  MsgFileReader& operator=(const MsgFileReader&) = delete;

  bool next(MsgTuple& out);

 private:
  std::filesystem::path path_;
  std::FILE* f_ = nullptr;
  std::vector<char> buffer_;
};

/// Writes Msg_s of partition k. Input must be vid-ascending.
void msg_write(const Layout& layout, int partition, std::uint64_t superstep, std::span<const MsgTuple> tuples);
/// Reads Msg_s of partition k. A missing file is an empty stream for superstep 1 and an
/// IoError otherwise.
std::vector<MsgTuple> msg_read(const Layout& layout, int partition, std::uint64_t superstep);

}  // namespace dfp::storage
