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

#include <optional>

#include "dfp/dataflow/stream.hpp"
#include "dfp/storage/vertex_index.hpp"

namespace dfp::dataflow {

/// Input row of compute: the combined message (or NULL) and the vertex (or NULL).
struct JoinedTuple {
  VertexId vid = 0;
  std::optional<Blob> payload;
  std::optional<VertexTuple> vertex;

  friend bool operator==(const JoinedTuple&, const JoinedTuple&) = default;
};

/// Merges the vid-sorted message stream with a full scan of the vertex index. Emits the
/// inner matches and both outer sides.
class FullOuterJoin final : public Source<JoinedTuple> {
 public:
  FullOuterJoin(Source<MsgTuple>& msgs, storage::VertexIndex& idx);
  bool next(JoinedTuple& out) override;

 private:
  void advance_msg();
  void advance_vertex();

  Source<MsgTuple>& msgs_;
  storage::VertexIndex::Scanner scan_;
  OrderCheck check_{"full outer join message input", true};
  std::optional<MsgTuple> msg_;
  std::optional<VertexTuple> vertex_;
};

/// Probes the vertex index for each tuple of a vid-sorted stream. Unprobed keys are never
/// read.
class LeftOuterJoin final : public Source<JoinedTuple> {
 public:
  LeftOuterJoin(Source<MsgTuple>& in, storage::VertexIndex& idx);
  bool next(JoinedTuple& out) override;

 private:
  Source<MsgTuple>& in_;
  storage::VertexIndex::Prober probe_;
  OrderCheck check_{"left outer join input", true};
};

/// (vid, NULL) for an active vertex, nothing for a halted one.
inline std::optional<MsgTuple> null_msg(const VertexTuple& v) {
  if (v.halt) return std::nullopt;
  return MsgTuple{v.vid, std::nullopt};
}

/// Sorted union of the Msg and Vid streams by vid; the Msg tuple wins on duplicates.
class MergeMsgVid final : public Source<MsgTuple> {
 public:
  MergeMsgVid(Source<MsgTuple>& msgs, Source<MsgTuple>& vids) : msgs_(msgs), vids_(vids) {}
  bool next(MsgTuple& out) override;

 private:
  void pull_msg();
  void pull_vid();

  Source<MsgTuple>& msgs_;
  Source<MsgTuple>& vids_;
  OrderCheck msg_check_{"merge_msg_vid message input", true};
  OrderCheck vid_check_{"merge_msg_vid vid input", true};
  std::optional<MsgTuple> msg_;
  std::optional<MsgTuple> vid_;
  bool started_ = false;
};

}  // namespace dfp::dataflow
